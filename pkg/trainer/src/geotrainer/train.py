"""Training loop: multi-task loss (junction + 5 * boundary), traces, validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader

from .data import GeoforgeDataset
from .losses import boundary_loss, junction_loss, total_visual_loss
from .metrics import boundary_f1, decode_grid, junction_f1
from .model import ToyGeoModel


@dataclass
class TrainConfig:
    epochs: int = 3
    batch_size: int = 8
    lr: float = 2e-3
    seed: int = 0
    cell_thr: float = 0.35  # validation decode operating point
    bin_thr: float = 0.5


def seed_everything(seed: int) -> None:
    torch.manual_seed(seed)
    np.random.seed(seed % 2**32)


def make_model(seed: int = 0) -> ToyGeoModel:
    seed_everything(seed)
    return ToyGeoModel()


def train(
    model: ToyGeoModel,
    dataset: GeoforgeDataset,
    config: TrainConfig,
    val_dataset: GeoforgeDataset | None = None,
    trace_path: str | Path | None = None,
    stop_when: callable | None = None,
) -> list[dict]:
    """Train and return the metrics trace (per-batch rows + per-epoch summaries).

    ``stop_when`` gets the epoch-end validation row (if any) and may return
    True to stop early.
    """
    seed_everything(config.seed)
    loader = DataLoader(
        dataset,
        batch_size=config.batch_size,
        shuffle=True,
        num_workers=0,
        generator=torch.Generator().manual_seed(config.seed),
        drop_last=False,
    )
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    trace: list[dict] = []

    for epoch in range(config.epochs):
        model.train()
        epoch_losses = []
        for batch_idx, (img, grid_t, boundary_t) in enumerate(loader):
            optimizer.zero_grad()
            grid_p, boundary_p = model(img)
            jl = junction_loss(grid_p, grid_t)
            bl = boundary_loss(boundary_p, boundary_t)
            total = total_visual_loss(0.0, jl["l_junc"], bl)
            total.backward()
            optimizer.step()
            row = {
                "kind": "batch",
                "epoch": epoch,
                "batch": batch_idx,
                "l_junc": jl["l_junc"].detach().item(),
                "l_bodr": bl.detach().item(),
                "total": total.detach().item(),
            }
            epoch_losses.append(row["total"])
            trace.append(row)

        summary = {
            "kind": "epoch",
            "epoch": epoch,
            "mean_total": float(np.mean(epoch_losses)),
        }
        if val_dataset is not None:
            summary.update(evaluate(model, val_dataset, config.cell_thr, config.bin_thr))
        trace.append(summary)
        if stop_when is not None and stop_when(summary):
            break

    if trace_path is not None:
        with open(trace_path, "w") as f:
            for row in trace:
                f.write(json.dumps(row) + "\n")
    return trace


@torch.no_grad()
def evaluate(
    model: ToyGeoModel,
    dataset: GeoforgeDataset,
    cell_thr: float = 0.35,
    bin_thr: float = 0.5,
) -> dict:
    """Junction P/R/F1 (position match at 0.01 * diag) and boundary F1.

    junction_f1 is the pooled (micro) score over all junctions in the set;
    the *_macro fields average per-image scores, where an image with no
    junctions and no detections counts as 1.
    """
    model.eval()
    W, H = dataset.canvas
    d_tol = 0.01 * math.hypot(W, H)
    ps, rs, fs, bfs = [], [], [], []
    n_match = n_pred = n_gt = 0
    loader = DataLoader(dataset, batch_size=8, shuffle=False, num_workers=0)
    idx = 0
    for img, _, boundary_t in loader:
        grid_p, boundary_p = model(img)
        for b in range(img.shape[0]):
            preds = decode_grid(
                grid_p[b].double().numpy(), dataset.canvas, cell_thr, bin_thr
            )
            gts = [(j["x"], j["y"]) for j in dataset.junctions(idx)]
            p, r, f = junction_f1(preds, gts, d_tol)
            ps.append(p)
            rs.append(r)
            fs.append(f)
            n_match += round(r * len(gts))
            n_pred += len(preds)
            n_gt += len(gts)
            bfs.append(
                boundary_f1(boundary_p[b].numpy(), boundary_t[b].numpy())
            )
            idx += 1
    micro_p = n_match / n_pred if n_pred else 1.0
    micro_r = n_match / n_gt if n_gt else 1.0
    micro_f = (
        0.0 if micro_p + micro_r == 0 else 2 * micro_p * micro_r / (micro_p + micro_r)
    )
    return {
        "junction_precision": micro_p,
        "junction_recall": micro_r,
        "junction_f1": micro_f,
        "junction_f1_macro": float(np.mean(fs)),
        "junction_precision_macro": float(np.mean(ps)),
        "junction_recall_macro": float(np.mean(rs)),
        "boundary_f1": float(np.mean(bfs)),
    }


def save_model(model: ToyGeoModel, path: str | Path) -> None:
    torch.save(model.state_dict(), path)


def load_model(path: str | Path) -> ToyGeoModel:
    model = ToyGeoModel()
    model.load_state_dict(torch.load(path, weights_only=True))
    model.eval()
    return model
