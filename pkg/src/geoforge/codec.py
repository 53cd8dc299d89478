"""Junction <-> grid-target codec.

Targets are (60, 60, 33) float32 tensors indexed [gy, gx, channel] with the
channel layout

    0      cell confidence (labels: 0/1, predictions: [0, 1])
    1, 2   dx, dy offsets from the cell center, in cell-size units, [-0.5, 0.5)
    3..17  per-bin branch confidence, 15 bins of 24 degrees
    18..32 per-bin angle residual from the bin center, in bin widths, [-0.5, 0.5)

A junction belongs to the cell its center falls in; a second junction landing
in an occupied cell loses to whichever sits nearer the cell center. A second
branch falling in an occupied bin loses to the one nearer the bin center.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotate import JunctionLabel

__all__ = [
    "GRID",
    "NUM_BINS",
    "BIN_DEG",
    "CHANNELS",
    "DecodeThresholds",
    "encode",
    "decode",
    "write_gjt",
    "read_gjt",
]

GRID = 60
NUM_BINS = 15
BIN_DEG = 360.0 / NUM_BINS  # 24 degrees, exactly
CHANNELS = 1 + 2 + NUM_BINS + NUM_BINS  # 33

CH_CONF = 0
CH_DX = 1
CH_DY = 2
BIN_CONF0 = 3
BIN_RES0 = 3 + NUM_BINS

GJT_MAGIC = b"GJT1"


@dataclass(frozen=True)
class DecodeThresholds:
    cell_conf_min: float = 0.5
    bin_conf_min: float = 0.5

    def __post_init__(self):
        for v in (self.cell_conf_min, self.bin_conf_min):
            if not 0.0 < v < 1.0:
                raise ValueError("thresholds must lie in (0, 1)")


def encode(junctions: list[JunctionLabel], canvas: tuple[int, int]) -> np.ndarray:
    """Encode junction labels into a (60, 60, 33) float32 target tensor."""
    W, H = canvas
    cw = W / GRID
    ch = H / GRID
    target = np.zeros((GRID, GRID, CHANNELS), dtype=np.float32)
    # (gy, gx) -> squared offset distance of the junction that owns the cell
    owner_d2: dict[tuple[int, int], float] = {}

    for j in junctions:
        if not (0.0 <= j.x < W and 0.0 <= j.y < H):
            raise ValueError(f"junction ({j.x}, {j.y}) outside canvas {canvas}")
        gx = int(j.x / cw)
        gy = int(j.y / ch)
        dx = j.x / cw - (gx + 0.5)
        dy = j.y / ch - (gy + 0.5)
        d2 = dx * dx + dy * dy
        key = (gy, gx)
        if key in owner_d2 and owner_d2[key] <= d2:
            continue
        owner_d2[key] = d2

        cell = np.zeros(CHANNELS, dtype=np.float32)
        cell[CH_CONF] = 1.0
        cell[CH_DX] = dx
        cell[CH_DY] = dy
        bin_res_dist: dict[int, float] = {}
        for theta in j.branches:
            t = theta % 360.0
            k = min(int(t / BIN_DEG), NUM_BINS - 1)
            res = (t - (k * BIN_DEG + BIN_DEG / 2.0)) / BIN_DEG
            if k in bin_res_dist and bin_res_dist[k] <= abs(res):
                continue
            bin_res_dist[k] = abs(res)
            cell[BIN_CONF0 + k] = 1.0
            cell[BIN_RES0 + k] = res
        target[gy, gx] = cell

    return target


def decode(
    pred: np.ndarray,
    thresholds: DecodeThresholds = DecodeThresholds(),
    canvas: tuple[int, int] = (1000, 1000),
) -> list[JunctionLabel]:
    """Decode a target-shaped tensor back into junction labels.

    Cells passing the confidence threshold always emit a junction; one whose
    bins all fail the bin threshold comes back with an empty branch tuple.
    """
    pred = np.asarray(pred)
    if pred.shape != (GRID, GRID, CHANNELS):
        raise ValueError(f"expected shape {(GRID, GRID, CHANNELS)}, got {pred.shape}")
    W, H = canvas
    cw = W / GRID
    ch = H / GRID

    out: list[JunctionLabel] = []
    gys, gxs = np.nonzero(pred[:, :, CH_CONF] >= thresholds.cell_conf_min)
    for gy, gx in zip(gys.tolist(), gxs.tolist()):
        cell = pred[gy, gx].astype(np.float64)
        x = (gx + 0.5 + cell[CH_DX]) * cw
        y = (gy + 0.5 + cell[CH_DY]) * ch
        branches = []
        for k in range(NUM_BINS):
            if cell[BIN_CONF0 + k] >= thresholds.bin_conf_min:
                theta = (k * BIN_DEG + BIN_DEG / 2.0) + cell[BIN_RES0 + k] * BIN_DEG
                branches.append(theta % 360.0)
        out.append(
            JunctionLabel(
                x=float(x),
                y=float(y),
                branches=tuple(sorted(branches)),
                conf=float(cell[CH_CONF]),
            )
        )
    return out


def write_gjt(path: str | Path, tensor: np.ndarray) -> None:
    """GJT1 file: magic, u32 H/W/C little-endian, then row-major float32 data."""
    tensor = np.asarray(tensor)
    if tensor.shape != (GRID, GRID, CHANNELS):
        raise ValueError(f"expected shape {(GRID, GRID, CHANNELS)}, got {tensor.shape}")
    with open(path, "wb") as f:
        f.write(GJT_MAGIC)
        f.write(struct.pack("<III", GRID, GRID, CHANNELS))
        f.write(np.ascontiguousarray(tensor, dtype="<f4").tobytes())


def read_gjt(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != GJT_MAGIC:
        raise ValueError(f"{path}: bad magic {data[:4]!r}")
    h, w, c = struct.unpack("<III", data[4:16])
    if (h, w, c) != (GRID, GRID, CHANNELS):
        raise ValueError(f"{path}: unexpected dims {(h, w, c)}")
    expected = 16 + h * w * c * 4
    if len(data) != expected:
        raise ValueError(f"{path}: size {len(data)} != {expected}")
    arr = np.frombuffer(data, dtype="<f4", offset=16).reshape(h, w, c)
    return np.ascontiguousarray(arr)
