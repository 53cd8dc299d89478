"""The multi-task loss kernels and their fixed weighting constants.

Run from the repo root:  python demos/04_loss_kernels.py
"""

import numpy as np

from geoforge.annotate import JunctionLabel
from geoforge.codec import encode
from geoforge.losses import (
    boundary_loss,
    elementwise_losses,
    junction_loss,
    total_visual_loss,
)
from geoforge.losses_ref import junction_loss_ref

rng = np.random.default_rng(0)

# Elementwise building blocks.
print("bce(0.5 -> 1)      =", elementwise_losses("bce", [0.5], [1.0]), "(ln 2)")
print("smooth_l1(|d|=0.5) =", elementwise_losses("smooth_l1", [0.5], [0.0]))
print("smooth_l1(|d|=2.0) =", elementwise_losses("smooth_l1", [2.0], [0.0]))

# Junction grid loss: confidence terms weigh 1, location terms weigh 0.1.
target = encode(
    [JunctionLabel(x=505.0, y=505.0, branches=(90.0, 210.0))], (1000, 1000)
)
pred = np.clip(target + rng.normal(0, 0.08, target.shape).astype(np.float32), -1, 1)
report = junction_loss(pred, target)
for name, value in report.components.items():
    print(f"{name:<8} = {value:.6f}")

# The naive scalar-loop reference agrees with the vectorized kernel.
ref = junction_loss_ref(pred, target)
worst = max(abs(report.components[k] - v) for k, v in ref.items())
print(f"naive-loop reference agrees within {worst:.2e}")

# Stage totals: detection + junction + 5 * boundary.
l_bodr = boundary_loss(rng.random((64, 64)), rng.random((64, 64)))
print("total_visual_loss(1, 1, 1) =", total_visual_loss(1.0, 1.0, 1.0))
print("total_visual_loss(0, l_junc, l_bodr) =",
      total_visual_loss(0.0, report.total, l_bodr))
