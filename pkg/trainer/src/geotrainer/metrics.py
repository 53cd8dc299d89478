"""Self-contained validation metrics (grid decoding, junction F1, boundary F1).

Deliberately independent of the geoforge package: decoding follows the
documented GJT channel layout, matching follows the documented greedy
one-to-one protocol, and boundary F1 uses tolerance matching via explicit
disk dilation (numpy only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRID = 60
BIN_DEG = 24.0


@dataclass(frozen=True)
class DecodedJunction:
    x: float
    y: float
    conf: float
    branches: tuple[float, ...]


def decode_grid(
    grid: np.ndarray,
    canvas: tuple[int, int],
    cell_thr: float = 0.5,
    bin_thr: float = 0.5,
) -> list[DecodedJunction]:
    if grid.shape != (GRID, GRID, 33):
        raise ValueError(f"expected (60, 60, 33), got {grid.shape}")
    W, H = canvas
    cw, ch = W / GRID, H / GRID
    out = []
    gys, gxs = np.nonzero(grid[:, :, 0] >= cell_thr)
    for gy, gx in zip(gys.tolist(), gxs.tolist()):
        cell = grid[gy, gx].astype(np.float64)
        branches = tuple(
            sorted(
                ((k * BIN_DEG + BIN_DEG / 2.0) + cell[18 + k] * BIN_DEG) % 360.0
                for k in range(15)
                if cell[3 + k] >= bin_thr
            )
        )
        out.append(
            DecodedJunction(
                x=(gx + 0.5 + cell[1]) * cw,
                y=(gy + 0.5 + cell[2]) * ch,
                conf=float(cell[0]),
                branches=branches,
            )
        )
    return out


def junction_f1(
    preds: list[DecodedJunction],
    gts: list[tuple[float, float]],
    d_tol: float,
) -> tuple[float, float, float]:
    """Greedy one-to-one matching by descending confidence then distance."""
    pairs = []
    for i, p in enumerate(preds):
        for j, (gx, gy) in enumerate(gts):
            d = float(np.hypot(p.x - gx, p.y - gy))
            if d <= d_tol:
                pairs.append((-p.conf, d, i, j))
    pairs.sort()
    used_p: set[int] = set()
    used_g: set[int] = set()
    for _, _, i, j in pairs:
        if i not in used_p and j not in used_g:
            used_p.add(i)
            used_g.add(j)
    m = len(used_g)
    precision = m / len(preds) if preds else 1.0
    recall = m / len(gts) if gts else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def _dilate_disk(mask: np.ndarray, radius: float) -> np.ndarray:
    """Binary dilation by a euclidean disk via shifted ORs."""
    r = int(np.floor(radius))
    out = mask.copy()
    H, W = mask.shape
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx == 0 and dy == 0:
                continue
            if dx * dx + dy * dy > radius * radius:
                continue
            src = mask[max(0, dy) : H - max(0, -dy), max(0, dx) : W - max(0, -dx)]
            dst = out[max(0, -dy) : H - max(0, dy), max(0, -dx) : W - max(0, dx)]
            np.logical_or(dst, src, out=dst)
    return out


def boundary_f1(
    pred: np.ndarray, gt: np.ndarray, bin_thr: float = 0.5, match_tol: float = 2.0
) -> float:
    pb = np.asarray(pred) >= bin_thr
    gb = np.asarray(gt) >= bin_thr
    n_pred = int(pb.sum())
    n_gt = int(gb.sum())
    if n_pred == 0 and n_gt == 0:
        return 1.0
    if n_pred == 0 or n_gt == 0:
        return 0.0
    precision = float((pb & _dilate_disk(gb, match_tol)).sum()) / n_pred
    recall = float((gb & _dilate_disk(pb, match_tol)).sum()) / n_gt
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)
