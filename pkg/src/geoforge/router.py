"""Feature-router math: pooled gating, level alignment, fusion, projection.

Feature maps are (C, H, W) numpy arrays. Four routed pyramid levels carry 256
channels each (by convention the attention-mixed top level plus the three
coarsest levels: F1*, F3, F4, F5); the general visual branch carries 1024.
The router MLP gates the four levels from the concatenated spatially-pooled
features (2048 wide); fusion either sums the aligned weighted levels (1024
channels out) or concatenates them with the general branch (5120 channels
out). All parameters come from a documented seeded initialization so results
are reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.special import erf

__all__ = [
    "GEO_CHANNELS",
    "CLIP_CHANNELS",
    "NUM_LEVELS",
    "POOLED_WIDTH",
    "ROUTER_HIDDEN",
    "TEXT_WIDTH",
    "RouterMode",
    "MlpParams",
    "RouterParams",
    "MlpProjector",
    "gelu",
    "make_router_params",
    "make_projector",
    "pool_concat",
    "route",
    "align_level",
    "fuse",
    "resize_tokens",
    "project",
    "bilinear_resize",
    "append_tokens",
    "save_router_params",
    "load_router_params",
]

GEO_CHANNELS = 256
CLIP_CHANNELS = 1024
NUM_LEVELS = 4
POOLED_WIDTH = NUM_LEVELS * GEO_CHANNELS + CLIP_CHANNELS  # 2048
ROUTER_HIDDEN = 512
TEXT_WIDTH = 4096
CONCAT_WIDTH = NUM_LEVELS * CLIP_CHANNELS + CLIP_CHANNELS  # 5120


class RouterMode(str, Enum):
    SOFT_SOFTMAX = "soft_softmax"  # sum fusion
    SOFT_SIGMOID = "soft_sigmoid"  # concat fusion
    SPARSE = "sparse"
    CONSTANT = "constant"


def gelu(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


@dataclass(frozen=True)
class MlpParams:
    """Affine -> GELU -> affine."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        h = gelu(np.asarray(x, dtype=np.float64) @ self.w1 + self.b1)
        return h @ self.w2 + self.b2


@dataclass(frozen=True)
class RouterParams:
    mode: RouterMode
    gate: MlpParams  # 2048 -> 512 -> 4
    align: tuple[MlpParams, ...]  # per level, 256 -> 1024 -> 1024
    seed: int


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    scale = math.sqrt(2.0 / (fan_in + fan_out))
    return rng.normal(0.0, scale, size=(fan_in, fan_out))


def _make_mlp(rng: np.random.Generator, d_in: int, d_hidden: int, d_out: int) -> MlpParams:
    return MlpParams(
        w1=_xavier(rng, d_in, d_hidden),
        b1=np.zeros(d_hidden),
        w2=_xavier(rng, d_hidden, d_out),
        b2=np.zeros(d_out),
    )


def make_router_params(mode: RouterMode | str = RouterMode.SOFT_SOFTMAX, seed: int = 0) -> RouterParams:
    """Seeded Xavier-normal weights, zero biases; draw order is fixed."""
    mode = RouterMode(mode)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(7,)))
    gate = _make_mlp(rng, POOLED_WIDTH, ROUTER_HIDDEN, NUM_LEVELS)
    align = tuple(
        _make_mlp(rng, GEO_CHANNELS, CLIP_CHANNELS, CLIP_CHANNELS) for _ in range(NUM_LEVELS)
    )
    return RouterParams(mode=mode, gate=gate, align=align, seed=seed)


@dataclass(frozen=True)
class MlpProjector:
    """mlp2x_gelu token projector: affine -> GELU -> affine into the text width."""

    in_width: int
    params: MlpParams


def make_projector(kind: str, seed: int = 0):
    """'channel_single' -> one 5120-wide projector; 'sequence_dual' -> (clip, geo) pair."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(11,)))
    if kind == "channel_single":
        return MlpProjector(CONCAT_WIDTH, _make_mlp(rng, CONCAT_WIDTH, TEXT_WIDTH, TEXT_WIDTH))
    if kind == "sequence_dual":
        clip = MlpProjector(CLIP_CHANNELS, _make_mlp(rng, CLIP_CHANNELS, TEXT_WIDTH, TEXT_WIDTH))
        geo = MlpProjector(CLIP_CHANNELS, _make_mlp(rng, CLIP_CHANNELS, TEXT_WIDTH, TEXT_WIDTH))
        return clip, geo
    raise ValueError(f"unknown projector kind {kind!r}")


def _check_map(name: str, fmap: np.ndarray, channels: int | None = None) -> np.ndarray:
    m = np.asarray(fmap)
    if m.ndim != 3 or min(m.shape) < 1:
        raise ValueError(f"{name} must be a non-empty (C, H, W) map, got {m.shape}")
    if channels is not None and m.shape[0] != channels:
        raise ValueError(f"{name} must have {channels} channels, got {m.shape[0]}")
    return m


def pool_concat(geo: list[np.ndarray], clip: np.ndarray) -> np.ndarray:
    """Spatial mean per channel, concatenated as [geo1..geo4, clip] (length 2048)."""
    if len(geo) != NUM_LEVELS:
        raise ValueError(f"expected {NUM_LEVELS} geo maps, got {len(geo)}")
    parts = [
        _check_map(f"geo[{i}]", g, GEO_CHANNELS).mean(axis=(1, 2)) for i, g in enumerate(geo)
    ]
    parts.append(_check_map("clip", clip, CLIP_CHANNELS).mean(axis=(1, 2)))
    return np.concatenate(parts).astype(np.float64)


def route(pooled: np.ndarray, params: RouterParams) -> np.ndarray:
    """Routing weights w^1..w^4 for the configured mode."""
    v = np.asarray(pooled, dtype=np.float64)
    if v.shape != (POOLED_WIDTH,):
        raise ValueError(f"pooled vector must have shape ({POOLED_WIDTH},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("pooled vector contains non-finite values")
    if params.mode is RouterMode.CONSTANT:
        return np.full(NUM_LEVELS, 1.0 / NUM_LEVELS)
    logits = params.gate.apply(v)
    if params.mode is RouterMode.SOFT_SOFTMAX:
        z = logits - logits.max()
        e = np.exp(z)
        return e / e.sum()
    if params.mode is RouterMode.SOFT_SIGMOID:
        return 1.0 / (1.0 + np.exp(-logits))
    w = np.zeros(NUM_LEVELS)
    w[int(np.argmax(logits))] = 1.0
    return w


def bilinear_resize(fmap: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Corner-aligned bilinear resize of a (C, H, W) map; identity when sizes match."""
    m = _check_map("fmap", fmap)
    C, H, W = m.shape
    H2, W2 = out_hw
    if H2 < 1 or W2 < 1:
        raise ValueError(f"invalid target size {out_hw}")
    if (H2, W2) == (H, W):
        return m

    def axis_coords(n_in, n_out):
        if n_out == 1 or n_in == 1:
            return np.zeros(n_out)
        return np.linspace(0.0, n_in - 1.0, n_out)

    ys = axis_coords(H, H2)
    xs = axis_coords(W, W2)
    y0 = np.clip(np.floor(ys).astype(int), 0, H - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, W - 1)
    y1 = np.minimum(y0 + 1, H - 1)
    x1 = np.minimum(x0 + 1, W - 1)
    fy = (ys - y0)[None, :, None]
    fx = (xs - x0)[None, None, :]

    a = m[:, y0][:, :, x0]
    b = m[:, y0][:, :, x1]
    c = m[:, y1][:, :, x0]
    d = m[:, y1][:, :, x1]
    top = a * (1.0 - fx) + b * fx
    bot = c * (1.0 - fx) + d * fx
    return top * (1.0 - fy) + bot * fy


def align_level(geo_map: np.ndarray, out_hw: tuple[int, int], params: RouterParams, level: int) -> np.ndarray:
    """Resize one geo level to the target grid and lift 256 -> 1024 channels."""
    m = _check_map("geo_map", geo_map, GEO_CHANNELS)
    resized = bilinear_resize(m, out_hw)
    H, W = out_hw
    tokens = resized.reshape(GEO_CHANNELS, H * W).T
    lifted = params.align[level].apply(tokens)
    return lifted.T.reshape(CLIP_CHANNELS, H, W)


def fuse(
    geo: list[np.ndarray],
    clip: np.ndarray,
    w: np.ndarray,
    strategy: str,
    params: RouterParams,
) -> np.ndarray:
    """Combine weighted aligned levels: 'sum' -> 1024 channels, 'concat' -> 5120."""
    if strategy not in ("sum", "concat"):
        raise ValueError(f"unknown fusion strategy {strategy!r}")
    if len(geo) != NUM_LEVELS:
        raise ValueError(f"expected {NUM_LEVELS} geo maps, got {len(geo)}")
    clip = _check_map("clip", clip, CLIP_CHANNELS)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (NUM_LEVELS,):
        raise ValueError(f"weights must have shape ({NUM_LEVELS},), got {w.shape}")
    out_hw = (clip.shape[1], clip.shape[2])

    if strategy == "sum":
        # Zero-weight levels are skipped so one-hot weights reproduce the
        # selected aligned level bit for bit.
        acc = None
        for i in range(NUM_LEVELS):
            if w[i] == 0.0:
                continue
            term = w[i] * align_level(geo[i], out_hw, params, i)
            acc = term if acc is None else acc + term
        if acc is None:
            acc = np.zeros((CLIP_CHANNELS, *out_hw))
        return acc

    parts = [w[i] * align_level(geo[i], out_hw, params, i) for i in range(NUM_LEVELS)]
    parts.append(np.asarray(clip, dtype=np.float64))
    return np.concatenate(parts, axis=0)


def resize_tokens(tokens: np.ndarray, fraction: float, clip_token_count: int) -> np.ndarray:
    """Linearly resample a (N, C) token sequence to round(fraction * clip count) tokens."""
    if fraction <= 0:
        raise ValueError("fraction must be > 0")
    t = np.asarray(tokens, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] < 1:
        raise ValueError(f"tokens must be a non-empty (N, C) array, got {t.shape}")
    m = int(round(fraction * clip_token_count))
    if m < 1:
        raise ValueError(f"target token count rounds to {m}")
    n = t.shape[0]
    if m == n:
        return t.copy()
    if n == 1:
        return np.repeat(t, m, axis=0)
    pos = np.linspace(0.0, n - 1.0, m)
    i0 = np.clip(np.floor(pos).astype(int), 0, n - 1)
    i1 = np.minimum(i0 + 1, n - 1)
    f = (pos - i0)[:, None]
    return t[i0] * (1.0 - f) + t[i1] * f


def project(tokens: np.ndarray, projector: MlpProjector) -> np.ndarray:
    """Per-token mlp2x_gelu projection; preserves token count."""
    t = np.asarray(tokens, dtype=np.float64)
    if t.ndim != 2 or t.shape[1] != projector.in_width:
        raise ValueError(
            f"tokens must be (N, {projector.in_width}), got {t.shape}"
        )
    return projector.params.apply(t)


def append_tokens(clip_tokens: np.ndarray, geo_tokens: np.ndarray) -> np.ndarray:
    """Sequence-wise fusion: geo tokens appended after the clip tokens."""
    a = np.asarray(clip_tokens)
    b = np.asarray(geo_tokens)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError("token widths must match for sequence fusion")
    return np.concatenate([a, b], axis=0)


# ---------------------------------------------------------------------------
# serialization: JSON header line + raw little-endian float64 blocks
# ---------------------------------------------------------------------------

_BLOCK_ORDER = ("gate.w1", "gate.b1", "gate.w2", "gate.b2") + tuple(
    f"align{i}.{n}" for i in range(NUM_LEVELS) for n in ("w1", "b1", "w2", "b2")
)


def _blocks(params: RouterParams) -> dict[str, np.ndarray]:
    out = {
        "gate.w1": params.gate.w1,
        "gate.b1": params.gate.b1,
        "gate.w2": params.gate.w2,
        "gate.b2": params.gate.b2,
    }
    for i, mlp in enumerate(params.align):
        out[f"align{i}.w1"] = mlp.w1
        out[f"align{i}.b1"] = mlp.b1
        out[f"align{i}.w2"] = mlp.w2
        out[f"align{i}.b2"] = mlp.b2
    return out


def save_router_params(path: str | Path, params: RouterParams) -> None:
    blocks = _blocks(params)
    header = {
        "format": "GRP1",
        "mode": params.mode.value,
        "seed": params.seed,
        "dtype": "<f8",
        "blocks": [{"name": n, "shape": list(blocks[n].shape)} for n in _BLOCK_ORDER],
    }
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode() + b"\n")
        for name in _BLOCK_ORDER:
            f.write(np.ascontiguousarray(blocks[name], dtype="<f8").tobytes())


def load_router_params(path: str | Path) -> RouterParams:
    data = Path(path).read_bytes()
    nl = data.index(b"\n")
    header = json.loads(data[:nl].decode())
    if header.get("format") != "GRP1":
        raise ValueError(f"{path}: not a router-params file")
    offset = nl + 1
    arrays: dict[str, np.ndarray] = {}
    for spec in header["blocks"]:
        shape = tuple(spec["shape"])
        n = int(np.prod(shape)) if shape else 1
        arrays[spec["name"]] = np.frombuffer(
            data, dtype=header["dtype"], count=n, offset=offset
        ).reshape(shape).copy()
        offset += n * 8
    gate = MlpParams(arrays["gate.w1"], arrays["gate.b1"], arrays["gate.w2"], arrays["gate.b2"])
    align = tuple(
        MlpParams(
            arrays[f"align{i}.w1"],
            arrays[f"align{i}.b1"],
            arrays[f"align{i}.w2"],
            arrays[f"align{i}.b2"],
        )
        for i in range(NUM_LEVELS)
    )
    return RouterParams(
        mode=RouterMode(header["mode"]), gate=gate, align=align, seed=header["seed"]
    )
