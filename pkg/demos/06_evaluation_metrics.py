"""Detection mAP, junction precision/recall, and boundary F1 on worked cases.

Run from the repo root:  python demos/06_evaluation_metrics.py
"""

import numpy as np

from geoforge.annotate import JunctionLabel
from geoforge.metrics import (
    Detection,
    boundary_f1,
    iou,
    junction_score,
    mean_average_precision,
)

# IoU on overlapping boxes.
print("iou identical:", iou((0, 0, 10, 10), (0, 0, 10, 10)))
print("iou quarter-overlap:", iou((0, 0, 10, 10), (5, 5, 10, 10)), "(= 1/7)")

# A false positive ranked above the true positive caps precision at 0.5.
gts = [Detection(0, 1, (10, 10, 20, 20))]
preds = [
    Detection(0, 1, (500, 500, 20, 20), 0.95),
    Detection(0, 1, (10, 10, 20, 20), 0.90),
]
res = mean_average_precision(preds, gts)
print("AP with FP ranked first:", res.per_class[1])

# Junction matching is one-to-one within a pixel tolerance.
gt_j = [JunctionLabel(100, 100, (0.0, 90.0))]
pred_j = [
    JunctionLabel(101, 100, (3.0, 95.0), conf=0.9),
    JunctionLabel(99, 100, (180.0,), conf=0.8),
]
s = junction_score(pred_j, gt_j, d_tol=5.0, ang_tol=12.0)
print(f"junction P={s.precision} R={s.recall} F1={s.f1:.4f} branches={s.branch_accuracy}")

# Boundary F1 forgives small localization error via the match tolerance.
gt = np.zeros((50, 50))
gt[20, 10:40] = 1.0
shifted = np.zeros((50, 50))
shifted[21, 10:40] = 1.0
print("boundary F1, 1 px shift, tol 2:", boundary_f1(shifted, gt, match_tol=2.0))
print("boundary F1, 1 px shift, tol 0.5:", round(boundary_f1(shifted, gt, match_tol=0.5), 4))
