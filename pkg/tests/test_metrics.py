import numpy as np
import pytest

from geoforge.annotate import JunctionLabel
from geoforge.metrics import (
    Detection,
    boundary_f1,
    iou,
    junction_score,
    mean_average_precision,
)


class TestIou:
    def test_identical(self):
        assert iou((0, 0, 10, 10), (0, 0, 10, 10)) == 1.0

    def test_disjoint(self):
        assert iou((0, 0, 10, 10), (20, 20, 5, 5)) == 0.0

    def test_one_seventh(self):
        # intersection 25, union 175
        assert abs(iou((0, 0, 10, 10), (5, 5, 10, 10)) - 1 / 7) < 1e-12

    def test_degenerate(self):
        with pytest.raises(ValueError):
            iou((0, 0, 0, 10), (0, 0, 10, 10))


class TestMeanAveragePrecision:
    def test_single_match_ap_one(self):
        gts = [Detection(0, 1, (10, 10, 20, 20))]
        preds = [Detection(0, 1, (11, 11, 20, 20), 0.9)]
        res = mean_average_precision(preds, gts)
        assert res.per_class[1] == 1.0
        assert res.map == 1.0

    def test_fp_before_tp_gives_half(self):
        gts = [Detection(0, 1, (10, 10, 20, 20))]
        preds = [
            Detection(0, 1, (500, 500, 20, 20), 0.95),  # IoU 0, false positive
            Detection(0, 1, (10, 10, 20, 20), 0.90),  # true positive
        ]
        res = mean_average_precision(preds, gts)
        assert res.per_class[1] == 0.5

    def test_no_predictions_ap_zero(self):
        gts = [Detection(0, 1, (10, 10, 20, 20))]
        res = mean_average_precision([], gts)
        assert res.per_class[1] == 0.0
        assert res.map == 0.0

    def test_class_without_gt_excluded(self):
        gts = [Detection(0, 1, (10, 10, 20, 20))]
        preds = [
            Detection(0, 1, (10, 10, 20, 20), 0.9),
            Detection(0, 2, (50, 50, 10, 10), 0.9),  # class 2 has no GT
        ]
        res = mean_average_precision(preds, gts)
        assert set(res.per_class) == {1}
        assert res.map == 1.0

    def test_one_prediction_per_gt(self):
        # a second hit on an already-matched GT is a false positive
        gts = [Detection(0, 1, (10, 10, 20, 20))]
        preds = [
            Detection(0, 1, (10, 10, 20, 20), 0.9),
            Detection(0, 1, (11, 11, 20, 20), 0.8),
        ]
        res = mean_average_precision(preds, gts)
        assert res.per_class[1] == 1.0  # recall 1 reached at precision 1

    def test_multi_image_and_multi_class(self):
        gts = [
            Detection(0, 1, (0, 0, 10, 10)),
            Detection(1, 1, (0, 0, 10, 10)),
            Detection(1, 2, (50, 50, 10, 10)),
        ]
        preds = [
            Detection(0, 1, (0, 0, 10, 10), 0.9),
            Detection(1, 1, (100, 100, 10, 10), 0.8),  # miss
            Detection(1, 2, (50, 50, 10, 10), 0.7),
        ]
        res = mean_average_precision(preds, gts)
        assert res.per_class[2] == 1.0
        assert 0.0 < res.per_class[1] < 1.0
        assert res.map == pytest.approx(
            (res.per_class[1] + res.per_class[2]) / 2
        )

    def test_appending_lowest_confidence_fp_never_increases_ap(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            gts = [
                Detection(0, 1, (float(x), float(y), 10, 10))
                for x, y in rng.uniform(0, 200, (5, 2))
            ]
            preds = [
                Detection(
                    0,
                    1,
                    (g.bbox[0] + rng.uniform(-3, 3), g.bbox[1] + rng.uniform(-3, 3), 10, 10),
                    float(rng.uniform(0.5, 1.0)),
                )
                for g in gts[:4]
            ]
            base = mean_average_precision(preds, gts).per_class[1]
            worst = preds + [Detection(0, 1, (900, 900, 5, 5), 0.01)]
            appended = mean_average_precision(worst, gts).per_class[1]
            assert appended <= base + 1e-12


class TestJunctionScore:
    def test_perfect(self):
        js = [JunctionLabel(10, 10, (45.0, 225.0)), JunctionLabel(50, 50, (0.0, 90.0))]
        s = junction_score(js, js, d_tol=2.0)
        assert (s.precision, s.recall, s.f1, s.branch_accuracy) == (1, 1, 1, 1)

    def test_empty_pred(self):
        gts = [JunctionLabel(10, 10, (45.0,))]
        s = junction_score([], gts, d_tol=2.0)
        assert s.recall == 0.0
        assert s.f1 == 0.0

    def test_two_preds_one_gt(self):
        gts = [JunctionLabel(10, 10, (45.0,))]
        preds = [
            JunctionLabel(10.5, 10.0, (45.0,), conf=0.9),
            JunctionLabel(9.5, 10.0, (45.0,), conf=0.8),
        ]
        s = junction_score(preds, gts, d_tol=2.0)
        assert s.precision == 0.5
        assert s.recall == 1.0
        assert abs(s.f1 - 2 / 3) < 1e-12

    def test_confidence_orders_matching(self):
        # the higher-confidence pred wins the single GT even though it is farther
        gts = [JunctionLabel(10, 10, (45.0,))]
        preds = [
            JunctionLabel(11.0, 10.0, (45.0,), conf=0.95),
            JunctionLabel(10.1, 10.0, (45.0,), conf=0.5),
        ]
        s = junction_score(preds, gts, d_tol=2.0)
        assert s.precision == 0.5 and s.recall == 1.0

    def test_branch_accuracy_counts_within_tolerance(self):
        gts = [JunctionLabel(10, 10, (0.0, 90.0, 180.0, 270.0))]
        preds = [JunctionLabel(10, 10, (5.0, 100.0), conf=1.0)]
        s = junction_score(preds, gts, d_tol=2.0, ang_tol=12.0)
        assert s.branch_accuracy == 0.5  # 0 and 90 matched; 180, 270 missed

    def test_branch_accuracy_wraps_circularly(self):
        gts = [JunctionLabel(10, 10, (359.0,))]
        preds = [JunctionLabel(10, 10, (2.0,), conf=1.0)]
        s = junction_score(preds, gts, d_tol=1.0, ang_tol=5.0)
        assert s.branch_accuracy == 1.0

    def test_symmetry_swaps_precision_recall(self):
        rng = np.random.default_rng(1)
        a = [
            JunctionLabel(float(x), float(y), (float(rng.uniform(0, 360)),))
            for x, y in rng.uniform(0, 100, (8, 2))
        ]
        b = [
            JunctionLabel(float(x), float(y), (float(rng.uniform(0, 360)),))
            for x, y in rng.uniform(0, 100, (5, 2))
        ]
        ab = junction_score(a, b, d_tol=15.0)
        ba = junction_score(b, a, d_tol=15.0)
        assert ab.precision == pytest.approx(ba.recall)
        assert ab.recall == pytest.approx(ba.precision)
        assert ab.f1 == pytest.approx(ba.f1)

    def test_invalid_tolerance(self):
        with pytest.raises(ValueError):
            junction_score([], [], d_tol=0.0)


def boundary_f1_bruteforce(pred, gt, bin_thr, tol):
    """Quadratic-time matching oracle over explicit pixel pairs."""
    pb = np.argwhere(np.asarray(pred) >= bin_thr)
    gb = np.argwhere(np.asarray(gt) >= bin_thr)
    if len(pb) == 0 and len(gb) == 0:
        return 1.0
    if len(pb) == 0 or len(gb) == 0:
        return 0.0
    prec_hits = sum(
        1 for p in pb if min(np.hypot(*(p - g)) for g in gb) <= tol
    )
    rec_hits = sum(1 for g in gb if min(np.hypot(*(g - p)) for p in pb) <= tol)
    precision = prec_hits / len(pb)
    recall = rec_hits / len(gb)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


class TestBoundaryF1:
    def test_identical(self):
        m = np.zeros((40, 40))
        m[10, 5:30] = 1.0
        assert boundary_f1(m, m) == 1.0

    def test_both_empty(self):
        z = np.zeros((20, 20))
        assert boundary_f1(z, z) == 1.0

    def test_empty_pred_nonempty_gt(self):
        gt = np.zeros((20, 20))
        gt[5, 5:15] = 1.0
        assert boundary_f1(np.zeros((20, 20)), gt) == 0.0

    def test_one_pixel_shift_within_tolerance(self):
        gt = np.zeros((50, 50))
        gt[20, 10:40] = 1.0
        pred = np.zeros((50, 50))
        pred[21, 10:40] = 1.0  # shifted down one row
        assert boundary_f1(pred, gt, match_tol=2.0) == 1.0
        assert boundary_f1_bruteforce(pred, gt, 0.5, 2.0) == 1.0

    def test_matches_bruteforce_oracle_on_random_maps(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            pred = (rng.random((24, 24)) > 0.9).astype(float)
            gt = (rng.random((24, 24)) > 0.9).astype(float)
            got = boundary_f1(pred, gt, match_tol=1.5)
            want = boundary_f1_bruteforce(pred, gt, 0.5, 1.5)
            assert got == pytest.approx(want, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            boundary_f1(np.zeros((4, 4)), np.zeros((4, 5)))
