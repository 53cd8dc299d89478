"""Numerical gradient validation: central differences vs autograd, float64."""

from __future__ import annotations

import numpy as np
import torch

from .losses import boundary_loss, junction_loss


def central_diff_check(
    loss_fn,
    pred: torch.Tensor,
    n_samples: int = 60,
    h: float = 1e-6,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Coordinates are sampled uniformly over pred; entries where both gradients
    vanish (< 1e-10) are counted as exact.
    """
    assert pred.dtype == torch.float64
    pred = pred.clone().requires_grad_(True)
    loss = loss_fn(pred)
    loss.backward()
    analytic = pred.grad.detach()

    rng = np.random.default_rng(seed)
    flat = pred.detach().reshape(-1)
    idx = rng.choice(flat.numel(), size=min(n_samples, flat.numel()), replace=False)

    worst = 0.0
    for i in idx:
        orig = flat[i].item()
        flat[i] = orig + h
        up = float(loss_fn(pred.detach()))
        flat[i] = orig - h
        down = float(loss_fn(pred.detach()))
        flat[i] = orig
        numeric = (up - down) / (2.0 * h)
        ana = float(analytic.reshape(-1)[i])
        denom = max(abs(numeric), abs(ana))
        if denom < 1e-10:
            continue
        worst = max(worst, abs(numeric - ana) / denom)
    return worst


def _random_pair(rng: np.random.Generator) -> tuple[torch.Tensor, torch.Tensor]:
    target = np.zeros((60, 60, 33), np.float64)
    for cell in rng.choice(3600, size=20, replace=False):
        gy, gx = divmod(int(cell), 60)
        target[gy, gx, 0] = 1.0
        target[gy, gx, 1:3] = rng.uniform(-0.5, 0.5, 2)
        for k in rng.choice(15, size=3, replace=False):
            target[gy, gx, 3 + k] = 1.0
            target[gy, gx, 18 + k] = rng.uniform(-0.5, 0.5)
    pred = np.empty((60, 60, 33))
    # keep probabilities away from the bce clamp so the loss stays smooth
    pred[:, :, 0] = rng.uniform(0.05, 0.95, (60, 60))
    pred[:, :, 1:3] = rng.uniform(-0.6, 0.6, (60, 60, 2))
    pred[:, :, 3:18] = rng.uniform(0.05, 0.95, (60, 60, 15))
    pred[:, :, 18:33] = rng.uniform(-0.6, 0.6, (60, 60, 15))
    return torch.from_numpy(pred), torch.from_numpy(target)


def check_junction_loss(seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    pred, target = _random_pair(rng)
    return central_diff_check(
        lambda p: junction_loss(p, target)["l_junc"], pred, seed=seed
    )


def check_boundary_loss(seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    pred = torch.from_numpy(rng.uniform(0, 1, (48, 48)))
    target = torch.from_numpy(rng.uniform(0, 1, (48, 48)))
    # The loss is quadratic, so central differences carry no truncation error;
    # a larger step only shrinks the floating-point roundoff.
    return central_diff_check(lambda p: boundary_loss(p, target), pred, h=1e-3, seed=seed)


def loc_gradient_at_perfect_prediction(seed: int = 0) -> float:
    """Max |grad| of the location terms when pred equals target exactly."""
    rng = np.random.default_rng(seed)
    _, target = _random_pair(rng)
    pred = target.clone().requires_grad_(True)
    comps = junction_loss(pred, target)
    loc = 0.1 * (comps["l_c_loc"] + comps["l_b_loc"])
    loc.backward()
    grad = pred.grad[..., 1:3].abs().max() + pred.grad[..., 18:33].abs().max()
    return float(grad)
