import math

import numpy as np
import pytest
import torch

from geotrainer.gradcheck import (
    check_boundary_loss,
    check_junction_loss,
    loc_gradient_at_perfect_prediction,
)
from geotrainer.losses import (
    bce,
    boundary_loss,
    junction_loss,
    smooth_l1,
    total_visual_loss,
)
from geotrainer.oracle import random_grid_pair


class TestPrimitives:
    def test_bce_half(self):
        v = bce(torch.tensor([0.5]), torch.tensor([1.0]))
        assert abs(v.item() - math.log(2)) < 1e-6

    def test_smooth_l1_branches(self):
        assert smooth_l1(torch.tensor([0.5]), torch.tensor([0.0])).item() == 0.125
        assert smooth_l1(torch.tensor([2.0]), torch.tensor([0.0])).item() == 1.5

    def test_masked_mean_empty_mask_is_zero(self):
        v = bce(torch.rand(4), torch.zeros(4), torch.zeros(4))
        assert v.item() == 0.0


class TestJunctionLoss:
    def test_weighted_total(self):
        rng = np.random.default_rng(0)
        pred, target = random_grid_pair(rng)
        comps = junction_loss(torch.from_numpy(pred), torch.from_numpy(target))
        want = 0.1 * (comps["l_c_loc"] + comps["l_b_loc"]) + 1.0 * (
            comps["l_c_conf"] + comps["l_b_conf"]
        )
        assert comps["l_junc"].item() == pytest.approx(want.item(), rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            junction_loss(torch.zeros(60, 60, 33), torch.zeros(60, 60, 32))

    def test_perfect_loc_terms_zero(self):
        rng = np.random.default_rng(1)
        _, target = random_grid_pair(rng)
        t = torch.from_numpy(target)
        comps = junction_loss(t, t)
        assert comps["l_c_loc"].item() == 0.0
        assert comps["l_b_loc"].item() == 0.0


class TestLambdaProbe:
    def test_total_visual_weights(self):
        l_junc = torch.tensor(1.0)
        l_bodr = torch.tensor(1.0)
        assert total_visual_loss(1.0, l_junc, l_bodr).item() == 7.0

    def test_detection_off_probe(self):
        # toy training runs with l_det = 0: total must reduce to l_junc + 5 l_bodr
        l_junc = torch.tensor(0.37)
        l_bodr = torch.tensor(0.021)
        total = total_visual_loss(0.0, l_junc, l_bodr)
        assert total.item() == pytest.approx((l_junc + 5.0 * l_bodr).item(), rel=1e-12)


class TestGradients:
    def test_junction_loss_gradcheck(self):
        assert check_junction_loss(seed=0) < 1e-4

    def test_boundary_loss_gradcheck(self):
        assert check_boundary_loss(seed=0) < 1e-6

    def test_loc_gradient_zero_at_perfect_prediction(self):
        assert loc_gradient_at_perfect_prediction(seed=0) == 0.0

    def test_boundary_gradient_matches_closed_form(self):
        # grad of mean (p - t)^2 is 2 (p - t) / N
        torch.manual_seed(0)
        pred = torch.rand(8, 8, dtype=torch.float64, requires_grad=True)
        target = torch.rand(8, 8, dtype=torch.float64)
        boundary_loss(pred, target).backward()
        want = 2.0 * (pred.detach() - target) / pred.numel()
        assert torch.allclose(pred.grad, want, atol=1e-12)
