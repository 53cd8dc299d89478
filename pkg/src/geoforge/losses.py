"""Multi-task loss kernels: detection, junction grid, and boundary terms.

All reductions are means over unmasked elements; an empty mask contributes 0.
Binary cross-entropy clamps predictions to [1e-7, 1 - 1e-7] first. Totals are
computed from the reported component floats, so report.total always equals the
weighted sum of report.components exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codec import BIN_CONF0, BIN_RES0, CH_CONF, CH_DX, CHANNELS, GRID, NUM_BINS

__all__ = [
    "BCE_EPS",
    "LAMBDA_LOC",
    "LAMBDA_CONF",
    "BOUNDARY_WEIGHT",
    "LossReport",
    "elementwise_losses",
    "junction_total",
    "junction_loss",
    "detection_total",
    "detection_loss",
    "boundary_loss",
    "total_visual_loss",
]

BCE_EPS = 1e-7
LAMBDA_LOC = 0.1
LAMBDA_CONF = 1.0
BOUNDARY_WEIGHT = 5.0

_KINDS = ("bce", "smooth_l1", "l2")


@dataclass(frozen=True)
class LossReport:
    total: float
    components: dict[str, float] = field(default_factory=dict)


def _as_f64(name: str, arr) -> np.ndarray:
    a = np.asarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def elementwise_losses(kind: str, pred, target, mask=None) -> float:
    """Mean elementwise loss of the given kind over unmasked entries."""
    if kind not in _KINDS:
        raise ValueError(f"unknown loss kind {kind!r}")
    p = _as_f64("pred", pred)
    t = _as_f64("target", target)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: pred {p.shape} vs target {t.shape}")

    if kind == "bce":
        p = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
        vals = -(t * np.log(p) + (1.0 - t) * np.log(1.0 - p))
    elif kind == "smooth_l1":
        d = np.abs(p - t)
        vals = np.where(d < 1.0, 0.5 * d * d, d - 0.5)
    else:  # l2
        d = p - t
        vals = d * d

    if mask is None:
        return float(vals.mean()) if vals.size else 0.0
    m = np.broadcast_to(np.asarray(mask, dtype=bool), vals.shape)
    n = int(m.sum())
    if n == 0:
        return 0.0
    return float(vals[m].sum() / n)


def junction_total(l_c_conf: float, l_b_conf: float, l_c_loc: float, l_b_loc: float) -> float:
    """Weighted combination of the four junction terms."""
    return LAMBDA_LOC * (l_c_loc + l_b_loc) + LAMBDA_CONF * (l_c_conf + l_b_conf)


def detection_total(l_rpn: float, l_cls: float, l_reg: float) -> float:
    """Unweighted sum of the three detection terms."""
    return l_rpn + l_cls + l_reg


def junction_loss(pred, target) -> LossReport:
    """Grid-target loss: 0.1 * (cell_loc + bin_loc) + 1 * (cell_conf + bin_conf)."""
    p = np.asarray(pred)
    t = np.asarray(target)
    shape = (GRID, GRID, CHANNELS)
    if p.shape != shape or t.shape != shape:
        raise ValueError(f"expected two {shape} tensors, got {p.shape} and {t.shape}")

    pos_cells = t[:, :, CH_CONF] == 1.0
    pos_bins = t[:, :, BIN_CONF0 : BIN_CONF0 + NUM_BINS] == 1.0

    l_c_conf = elementwise_losses("bce", p[:, :, CH_CONF], t[:, :, CH_CONF])
    l_b_conf = elementwise_losses(
        "bce",
        p[:, :, BIN_CONF0 : BIN_CONF0 + NUM_BINS],
        t[:, :, BIN_CONF0 : BIN_CONF0 + NUM_BINS],
        mask=pos_cells[:, :, None],
    )
    l_c_loc = elementwise_losses(
        "l2", p[:, :, CH_DX : CH_DX + 2], t[:, :, CH_DX : CH_DX + 2],
        mask=pos_cells[:, :, None],
    )
    l_b_loc = elementwise_losses(
        "l2",
        p[:, :, BIN_RES0 : BIN_RES0 + NUM_BINS],
        t[:, :, BIN_RES0 : BIN_RES0 + NUM_BINS],
        mask=pos_bins,
    )

    total = junction_total(l_c_conf, l_b_conf, l_c_loc, l_b_loc)
    return LossReport(
        total=total,
        components={
            "l_c_conf": l_c_conf,
            "l_b_conf": l_b_conf,
            "l_c_loc": l_c_loc,
            "l_b_loc": l_b_loc,
            "l_junc": total,
        },
    )


def _region_mask(labels: np.ndarray) -> np.ndarray:
    """Per-region positive mask; multi-dim labels count a region with any 1."""
    if labels.ndim <= 1:
        return labels == 1.0
    return (labels == 1.0).any(axis=tuple(range(1, labels.ndim)))


def detection_loss(
    rpn_scores,
    rpn_labels,
    rpn_deltas,
    rpn_delta_targets,
    cls_scores,
    cls_labels,
    box_deltas,
    box_delta_targets,
) -> LossReport:
    """GLIP-style detection loss: objectness + alignment + box regression.

    Regression terms are masked to positive anchors / matched regions; with no
    positives they are exactly 0.
    """
    rpn_labels = _as_f64("rpn_labels", rpn_labels)
    cls_labels = _as_f64("cls_labels", cls_labels)
    rpn_deltas = np.asarray(rpn_deltas)
    box_deltas = np.asarray(box_deltas)

    rpn_pos = _region_mask(rpn_labels)
    if rpn_deltas.ndim > rpn_pos.ndim:
        rpn_pos = rpn_pos.reshape(rpn_pos.shape + (1,) * (rpn_deltas.ndim - rpn_pos.ndim))
    cls_pos = _region_mask(cls_labels)
    if box_deltas.ndim > cls_pos.ndim:
        cls_pos = cls_pos.reshape(cls_pos.shape + (1,) * (box_deltas.ndim - cls_pos.ndim))

    l_rpn = elementwise_losses("bce", rpn_scores, rpn_labels) + elementwise_losses(
        "smooth_l1", rpn_deltas, rpn_delta_targets, mask=rpn_pos
    )
    l_cls = elementwise_losses("bce", cls_scores, cls_labels)
    l_reg = elementwise_losses("smooth_l1", box_deltas, box_delta_targets, mask=cls_pos)

    total = detection_total(l_rpn, l_cls, l_reg)
    return LossReport(
        total=total,
        components={"l_rpn": l_rpn, "l_cls": l_cls, "l_reg": l_reg, "l_det": total},
    )


def boundary_loss(pred_map, gt_map) -> float:
    """Mean squared error between heatmaps of equal shape."""
    p = _as_f64("pred_map", pred_map)
    g = _as_f64("gt_map", gt_map)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    return elementwise_losses("l2", p, g)


def total_visual_loss(l_det: float, l_junc: float, l_bodr: float) -> float:
    """Stage-1 multi-task total: l_det + l_junc + 5 * l_bodr."""
    for name, v in (("l_det", l_det), ("l_junc", l_junc), ("l_bodr", l_bodr)):
        if v < 0:
            raise ValueError(f"{name} must be >= 0, got {v}")
    return l_det + l_junc + BOUNDARY_WEIGHT * l_bodr
