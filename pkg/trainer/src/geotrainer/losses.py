"""Differentiable losses with the same formulas the geoforge loss-oracle uses.

Reductions are means over unmasked elements (empty mask contributes zero),
bce clamps predictions to [1e-7, 1 - 1e-7], the junction total weighs the
location terms 0.1 and the confidence terms 1, and the stage total weighs
the boundary term 5. Parity with the oracle is asserted over exchanged
tensor files in the tests.
"""

from __future__ import annotations

import torch

BCE_EPS = 1e-7
LAMBDA_LOC = 0.1
LAMBDA_CONF = 1.0
BOUNDARY_WEIGHT = 5.0


def bce(pred: torch.Tensor, target: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    p = pred.clamp(BCE_EPS, 1.0 - BCE_EPS)
    vals = -(target * p.log() + (1.0 - target) * (1.0 - p).log())
    return _masked_mean(vals, mask)


def l2(pred: torch.Tensor, target: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    return _masked_mean((pred - target) ** 2, mask)


def smooth_l1(pred: torch.Tensor, target: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
    d = (pred - target).abs()
    vals = torch.where(d < 1.0, 0.5 * d * d, d - 0.5)
    return _masked_mean(vals, mask)


def _masked_mean(vals: torch.Tensor, mask: torch.Tensor | None) -> torch.Tensor:
    if mask is None:
        return vals.mean()
    mask = mask.expand_as(vals)
    n = mask.sum()
    if n == 0:
        return vals.sum() * 0.0  # keeps the graph alive with a true zero
    return (vals * mask).sum() / n


def junction_loss(pred: torch.Tensor, target: torch.Tensor) -> dict[str, torch.Tensor]:
    """Loss over (60, 60, 33) grids (or batches of them, leading dims folded in)."""
    if pred.shape != target.shape or pred.shape[-1] != 33:
        raise ValueError(f"expected matching (..., 60, 60, 33) grids, got {pred.shape} vs {target.shape}")
    pos_cells = (target[..., 0] == 1.0).unsqueeze(-1).to(pred.dtype)
    pos_bins = (target[..., 3:18] == 1.0).to(pred.dtype)

    l_c_conf = bce(pred[..., 0], target[..., 0])
    l_b_conf = bce(pred[..., 3:18], target[..., 3:18], pos_cells)
    l_c_loc = l2(pred[..., 1:3], target[..., 1:3], pos_cells)
    l_b_loc = l2(pred[..., 18:33], target[..., 18:33], pos_bins)
    total = LAMBDA_LOC * (l_c_loc + l_b_loc) + LAMBDA_CONF * (l_c_conf + l_b_conf)
    return {
        "l_c_conf": l_c_conf,
        "l_b_conf": l_b_conf,
        "l_c_loc": l_c_loc,
        "l_b_loc": l_b_loc,
        "l_junc": total,
    }


def boundary_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return l2(pred, target)


def total_visual_loss(l_det: torch.Tensor | float, l_junc: torch.Tensor, l_bodr: torch.Tensor) -> torch.Tensor:
    return l_det + l_junc + BOUNDARY_WEIGHT * l_bodr
