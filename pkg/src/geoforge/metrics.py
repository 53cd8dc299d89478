"""Detection, junction, and boundary evaluation.

Detection AP uses greedy confidence-ordered matching at a fixed IoU threshold
and 101-point interpolated precision; mAP averages the classes present in the
ground truth. Junction matching is greedy one-to-one within a distance
tolerance; boundary F1 matches binarized outline pixels within a pixel
tolerance via exact distance transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_edt

from .annotate import JunctionLabel

__all__ = [
    "Detection",
    "MapResult",
    "JunctionScore",
    "iou",
    "mean_average_precision",
    "junction_score",
    "boundary_f1",
]


@dataclass(frozen=True)
class Detection:
    image_id: int
    category_id: int
    bbox: tuple[float, float, float, float]  # x, y, w, h
    score: float | None = None  # None for ground truth


@dataclass(frozen=True)
class MapResult:
    per_class: dict[int, float] = field(default_factory=dict)
    map: float = 0.0


@dataclass(frozen=True)
class JunctionScore:
    precision: float
    recall: float
    f1: float
    branch_accuracy: float


def iou(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    """Intersection over union of two xywh boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    if aw <= 0 or ah <= 0 or bw <= 0 or bh <= 0:
        raise ValueError(f"degenerate box: {a if aw <= 0 or ah <= 0 else b}")
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union


def _average_precision(tp_flags: list[bool], num_gt: int) -> float:
    """101-point interpolated AP from confidence-ordered TP/FP flags."""
    if num_gt == 0:
        raise ValueError("AP undefined with no ground truth")
    if not tp_flags:
        return 0.0
    tp = np.cumsum(np.asarray(tp_flags, dtype=np.float64))
    fp = np.cumsum(~np.asarray(tp_flags, dtype=bool))
    recall = tp / num_gt
    precision = tp / (tp + fp)
    grid = np.linspace(0.0, 1.0, 101)
    interp = np.zeros_like(grid)
    for i, r in enumerate(grid):
        ok = recall >= r
        if ok.any():
            interp[i] = precision[ok].max()
    return float(interp.mean())


def mean_average_precision(
    preds: list[Detection], gts: list[Detection], iou_thr: float = 0.5
) -> MapResult:
    """Per-class AP and their mean over the classes present in the ground truth."""
    classes = sorted({g.category_id for g in gts})
    per_class: dict[int, float] = {}
    for cls in classes:
        cls_gts: dict[int, list[Detection]] = {}
        for g in gts:
            if g.category_id == cls:
                cls_gts.setdefault(g.image_id, []).append(g)
        num_gt = sum(len(v) for v in cls_gts.values())
        cls_preds = [p for p in preds if p.category_id == cls]
        cls_preds.sort(key=lambda p: -(p.score if p.score is not None else 1.0))

        matched: dict[int, list[bool]] = {k: [False] * len(v) for k, v in cls_gts.items()}
        flags: list[bool] = []
        for p in cls_preds:
            cands = cls_gts.get(p.image_id, [])
            best_iou = 0.0
            best_j = -1
            for j, g in enumerate(cands):
                if matched[p.image_id][j]:
                    continue
                v = iou(p.bbox, g.bbox)
                if v > best_iou:
                    best_iou, best_j = v, j
            if best_j >= 0 and best_iou >= iou_thr:
                matched[p.image_id][best_j] = True
                flags.append(True)
            else:
                flags.append(False)
        per_class[cls] = _average_precision(flags, num_gt)

    mean = float(np.mean(list(per_class.values()))) if per_class else 0.0
    return MapResult(per_class=per_class, map=mean)


def _circ_diff_deg(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def junction_score(
    preds: list[JunctionLabel],
    gts: list[JunctionLabel],
    d_tol: float,
    ang_tol: float = 12.0,
) -> JunctionScore:
    """Greedy one-to-one matching by descending confidence, then distance.

    Branch accuracy is the fraction of ground-truth branches at matched
    junctions that have a predicted branch within ``ang_tol`` degrees.
    """
    if d_tol <= 0:
        raise ValueError("d_tol must be > 0")
    pairs = []
    for i, p in enumerate(preds):
        conf = p.conf if p.conf is not None else 1.0
        for j, g in enumerate(gts):
            d = float(np.hypot(p.x - g.x, p.y - g.y))
            if d <= d_tol:
                pairs.append((-conf, d, i, j))
    pairs.sort()
    pred_used = set()
    gt_used = set()
    matches: list[tuple[int, int]] = []
    for _, _, i, j in pairs:
        if i in pred_used or j in gt_used:
            continue
        pred_used.add(i)
        gt_used.add(j)
        matches.append((i, j))

    precision = len(matches) / len(preds) if preds else 1.0
    recall = len(matches) / len(gts) if gts else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)

    total_branches = 0
    hit_branches = 0
    for i, j in matches:
        for tb in gts[j].branches:
            total_branches += 1
            if any(_circ_diff_deg(tb, pb) <= ang_tol for pb in preds[i].branches):
                hit_branches += 1
    branch_acc = hit_branches / total_branches if total_branches else 0.0
    return JunctionScore(precision=precision, recall=recall, f1=f1, branch_accuracy=branch_acc)


def boundary_f1(
    pred: np.ndarray, gt: np.ndarray, bin_thr: float = 0.5, match_tol: float = 2.0
) -> float:
    """Tolerance-matched F1 between binarized boundary maps."""
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gt, dtype=np.float64)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    pb = p >= bin_thr
    gb = g >= bin_thr
    n_pred = int(pb.sum())
    n_gt = int(gb.sum())
    if n_pred == 0 and n_gt == 0:
        return 1.0
    if n_pred == 0 or n_gt == 0:
        return 0.0
    dist_to_gt = distance_transform_edt(~gb)
    dist_to_pred = distance_transform_edt(~pb)
    precision = float((pb & (dist_to_gt <= match_tol)).sum()) / n_pred
    recall = float((gb & (dist_to_pred <= match_tol)).sum()) / n_gt
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)
