"""Naive scalar-loop reference losses.

Deliberately unvectorized; every value is computed element by element with
plain Python floats. This module is the independent oracle the optimized
kernels in ``losses`` are checked against, so it must not call them or share
their numpy reductions.
"""

from __future__ import annotations

import math

import numpy as np

BCE_EPS = 1e-7


def _flat(arr):
    return np.asarray(arr, dtype=np.float64).ravel().tolist()


def _bce_one(p: float, t: float) -> float:
    p = min(max(p, BCE_EPS), 1.0 - BCE_EPS)
    return -(t * math.log(p) + (1.0 - t) * math.log(1.0 - p))


def _smooth_l1_one(p: float, t: float) -> float:
    d = abs(p - t)
    return 0.5 * d * d if d < 1.0 else d - 0.5


def _l2_one(p: float, t: float) -> float:
    d = p - t
    return d * d


_ONE = {"bce": _bce_one, "smooth_l1": _smooth_l1_one, "l2": _l2_one}


def elementwise_ref(kind: str, pred, target, mask=None) -> float:
    fn = _ONE[kind]
    ps = _flat(pred)
    ts = _flat(target)
    if len(ps) != len(ts):
        raise ValueError("shape mismatch")
    if mask is None:
        ms = [1.0] * len(ps)
    else:
        m = np.broadcast_to(np.asarray(mask, dtype=bool), np.asarray(pred).shape)
        ms = [1.0 if v else 0.0 for v in m.ravel().tolist()]
    total = 0.0
    count = 0
    for p, t, m in zip(ps, ts, ms):
        if m:
            total += fn(p, t)
            count += 1
    return total / count if count else 0.0


def junction_loss_ref(pred, target) -> dict[str, float]:
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    H, W, _ = t.shape

    sum_cc = 0.0
    sum_bc = 0.0
    n_bc = 0
    sum_cl = 0.0
    n_cl = 0
    sum_bl = 0.0
    n_bl = 0
    for i in range(H):
        for j in range(W):
            sum_cc += _bce_one(float(p[i, j, 0]), float(t[i, j, 0]))
            if t[i, j, 0] == 1.0:
                for c in (1, 2):
                    sum_cl += _l2_one(float(p[i, j, c]), float(t[i, j, c]))
                    n_cl += 1
                for k in range(15):
                    sum_bc += _bce_one(float(p[i, j, 3 + k]), float(t[i, j, 3 + k]))
                    n_bc += 1
            for k in range(15):
                if t[i, j, 3 + k] == 1.0:
                    sum_bl += _l2_one(float(p[i, j, 18 + k]), float(t[i, j, 18 + k]))
                    n_bl += 1

    l_c_conf = sum_cc / (H * W)
    l_b_conf = sum_bc / n_bc if n_bc else 0.0
    l_c_loc = sum_cl / n_cl if n_cl else 0.0
    l_b_loc = sum_bl / n_bl if n_bl else 0.0
    total = 0.1 * (l_c_loc + l_b_loc) + 1.0 * (l_c_conf + l_b_conf)
    return {
        "l_c_conf": l_c_conf,
        "l_b_conf": l_b_conf,
        "l_c_loc": l_c_loc,
        "l_b_loc": l_b_loc,
        "l_junc": total,
    }


def detection_loss_ref(
    rpn_scores,
    rpn_labels,
    rpn_deltas,
    rpn_delta_targets,
    cls_scores,
    cls_labels,
    box_deltas,
    box_delta_targets,
) -> dict[str, float]:
    rpn_lab = np.asarray(rpn_labels, dtype=np.float64)
    cls_lab = np.asarray(cls_labels, dtype=np.float64)

    def region_pos(labels):
        if labels.ndim <= 1:
            return labels == 1.0
        return (labels == 1.0).any(axis=tuple(range(1, labels.ndim)))

    def masked_smooth_l1(deltas, targets, pos):
        d = np.asarray(deltas, dtype=np.float64)
        g = np.asarray(targets, dtype=np.float64)
        total = 0.0
        count = 0
        for idx in range(d.shape[0]):
            if not pos[idx]:
                continue
            for p, t in zip(d[idx].ravel().tolist(), g[idx].ravel().tolist()):
                total += _smooth_l1_one(p, t)
                count += 1
        return total / count if count else 0.0

    l_rpn = elementwise_ref("bce", rpn_scores, rpn_labels) + masked_smooth_l1(
        rpn_deltas, rpn_delta_targets, region_pos(rpn_lab)
    )
    l_cls = elementwise_ref("bce", cls_scores, cls_labels)
    l_reg = masked_smooth_l1(box_deltas, box_delta_targets, region_pos(cls_lab))
    total = l_rpn + l_cls + l_reg
    return {"l_rpn": l_rpn, "l_cls": l_cls, "l_reg": l_reg, "l_det": total}


def boundary_loss_ref(pred_map, gt_map) -> float:
    ps = _flat(pred_map)
    gs = _flat(gt_map)
    if len(ps) != len(gs):
        raise ValueError("shape mismatch")
    total = 0.0
    for p, g in zip(ps, gs):
        total += _l2_one(p, g)
    return total / len(ps) if ps else 0.0


def total_visual_loss_ref(l_det: float, l_junc: float, l_bodr: float) -> float:
    return l_det + l_junc + 5.0 * l_bodr
