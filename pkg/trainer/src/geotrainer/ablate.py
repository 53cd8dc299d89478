"""Router ablation harness: soft, four sparse selections, and constant weights.

Reproduces the experimental protocol at toy scale: the four routed levels
are the attention-mixed high-resolution map plus the three lower pyramid
levels; a frozen random stand-in supplies the general-branch pooled features;
each mode's fused map drives the trained decoder heads on a held-out set.
Full-scale accuracies are NOT reproduced and appear in the report as
reference context only.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from torch.utils.data import DataLoader

from .data import GeoforgeDataset
from .metrics import boundary_f1, decode_grid, junction_f1
from .model import PYRAMID_CHANNELS, ToyGeoModel

LEVEL_NAMES = ("F1*", "F3", "F4", "F5")
CLIP_DIM = 1024
POOLED_DIM = 4 * PYRAMID_CHANNELS + CLIP_DIM

REFERENCE_CONTEXT = (
    "Full-scale accuracy ordering (GeoQA top-1, channel fusion): "
    "soft 67.0 > best sparse 64.9 > constant 62.8. Reported as reference "
    "context only; toy-scale runs do not reproduce it."
)


class FrozenGate(torch.nn.Module):
    """Seeded random MLP 2048 -> 512 -> 4; never trained."""

    def __init__(self, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        self.w1 = torch.nn.Parameter(
            torch.randn(POOLED_DIM, 512, generator=gen) * (2.0 / (POOLED_DIM + 512)) ** 0.5,
            requires_grad=False,
        )
        self.w2 = torch.nn.Parameter(
            torch.randn(512, 4, generator=gen) * (2.0 / (512 + 4)) ** 0.5,
            requires_grad=False,
        )

    def forward(self, pooled: torch.Tensor) -> torch.Tensor:
        return F.gelu(pooled @ self.w1) @ self.w2


def frozen_clip_pooled(seed: int = 0) -> torch.Tensor:
    gen = torch.Generator().manual_seed(seed + 1)
    return torch.randn(CLIP_DIM, generator=gen)


def routed_levels(model: ToyGeoModel, img: torch.Tensor) -> list[torch.Tensor]:
    levels = model.pyramid(img)
    star = model.f1_star(levels)
    return [star, levels[2], levels[3], levels[4]]


def fuse_levels(routed: list[torch.Tensor], weights: torch.Tensor) -> torch.Tensor:
    """Weighted sum of the four levels, bilinearly resized to the first's grid."""
    out_hw = routed[0].shape[-2:]
    acc = torch.zeros_like(routed[0])
    for w, level in zip(weights, routed):
        if float(w) == 0.0:
            continue
        resized = (
            level
            if level.shape[-2:] == out_hw
            else F.interpolate(level, size=out_hw, mode="bilinear", align_corners=True)
        )
        acc = acc + w * resized
    return acc


def mode_weights(mode: str, pooled: torch.Tensor, gate: FrozenGate) -> torch.Tensor:
    if mode == "constant":
        return torch.full((4,), 0.25)
    if mode.startswith("sparse:"):
        idx = LEVEL_NAMES.index(mode.split(":", 1)[1])
        w = torch.zeros(4)
        w[idx] = 1.0
        return w
    if mode == "soft":
        return torch.softmax(gate(pooled), dim=-1)
    if mode == "mean_fusion":  # internal control row: plain average
        return torch.full((4,), 0.25)
    raise ValueError(f"unknown router mode {mode!r}")


ALL_MODES = ("soft",) + tuple(f"sparse:{n}" for n in LEVEL_NAMES) + ("constant",)


@torch.no_grad()
def run_ablation(
    model: ToyGeoModel,
    dataset: GeoforgeDataset,
    seed: int = 0,
    cell_thr: float = 0.35,
    bin_thr: float = 0.5,
    modes: tuple[str, ...] = ALL_MODES,
) -> dict:
    model.eval()
    gate = FrozenGate(seed)
    clip_vec = frozen_clip_pooled(seed)
    W, H = dataset.canvas
    d_tol = 0.01 * float(np.hypot(W, H))

    rows = {m: {"junction_f1": [], "boundary_f1": [], "weights": []} for m in modes}
    rows["mean_fusion"] = {"junction_f1": [], "boundary_f1": [], "weights": []}
    loader = DataLoader(dataset, batch_size=4, shuffle=False, num_workers=0)
    idx = 0
    for img, _, boundary_t in loader:
        routed = routed_levels(model, img)
        pooled_levels = [lvl.mean(dim=(2, 3)) for lvl in routed]  # (B, 256) each
        for b in range(img.shape[0]):
            gts = [(j["x"], j["y"]) for j in dataset.junctions(idx)]
            pooled = torch.cat([p[b] for p in pooled_levels] + [clip_vec])
            routed_b = [lvl[b : b + 1] for lvl in routed]
            for mode in list(modes) + ["mean_fusion"]:
                w = mode_weights(mode, pooled, gate)
                fused = fuse_levels(routed_b, w)
                junction, boundary = model.decode_heads(fused, tuple(img.shape[-2:]))
                grid = model.pack_grid(junction)[0].double().numpy()
                preds = decode_grid(grid, dataset.canvas, cell_thr, bin_thr)
                _, _, f1 = junction_f1(preds, gts, d_tol)
                rows[mode]["junction_f1"].append(f1)
                rows[mode]["boundary_f1"].append(
                    boundary_f1(boundary[0].numpy(), boundary_t[b].numpy())
                )
                rows[mode]["weights"].append([float(x) for x in w])
            idx += 1

    configurations = []
    for mode in modes:
        configurations.append(
            {
                "mode": mode,
                "junction_f1": float(np.mean(rows[mode]["junction_f1"])),
                "boundary_f1": float(np.mean(rows[mode]["boundary_f1"])),
                "mean_weights": np.mean(rows[mode]["weights"], axis=0).round(4).tolist(),
            }
        )
    constant_row = next(c for c in configurations if c["mode"] == "constant")
    mean_row = {
        "junction_f1": float(np.mean(rows["mean_fusion"]["junction_f1"])),
        "boundary_f1": float(np.mean(rows["mean_fusion"]["boundary_f1"])),
    }
    return {
        "configurations": configurations,
        "constant_equals_mean_fusion": (
            constant_row["junction_f1"] == mean_row["junction_f1"]
            and constant_row["boundary_f1"] == mean_row["boundary_f1"]
        ),
        "mean_fusion": mean_row,
        "context": REFERENCE_CONTEXT,
    }


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True))
