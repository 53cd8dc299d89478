"""Exact junction and boundary ground truth straight from shape parameters.

Run from the repo root:  python demos/02_analytic_ground_truth.py
"""

from pathlib import Path

import numpy as np
from PIL import Image

from geoforge.annotate import boundary_heatmap, extract_junctions, save_boundary_png
from geoforge.geometry import CircleCurve, Segment, intersect_primitives
from geoforge.render import render_scene
from geoforge.shapes import GenConfig, sample_scene

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# Curve-level intersections carry tangent directions for both curves, the
# raw material for junction branch angles.
seg = Segment((480, 500), (520, 500))
circ = CircleCurve((500, 500), 15)
for hit in intersect_primitives(seg, circ):
    print(f"segment x circle at {hit.point}: seg dirs {hit.dirs_a}, circle dirs {hit.dirs_b}")

# Scene-level extraction merges crossings and polygon corners.
scene = sample_scene(GenConfig(count=1, master_seed=77), 0)
junctions = extract_junctions(scene)
print(f"\nscene with {len(scene.shapes)} elements has {len(junctions)} junctions")
for j in junctions[:5]:
    angles = ", ".join(f"{b:.1f}" for b in j.branches)
    print(f"   ({j.x:7.2f}, {j.y:7.2f})  branches [{angles}]")

# Boundary target: Gaussian profile of the distance to the stroked outline.
heat = boundary_heatmap(scene, stroke=2, sigma=1.0)
print(f"\nboundary heatmap: max {heat.max()}, nonzero {np.count_nonzero(heat)} px")
save_boundary_png(OUT / "boundary.png", heat)

# Overlay the junctions on the render for inspection.
raster = render_scene(scene)
rgb = np.stack([raster] * 3, axis=-1)
for j in junctions:
    x, y = int(round(j.x)), int(round(j.y))
    rgb[max(0, y - 3) : y + 4, max(0, x - 3) : x + 4] = (255, 0, 0)
Image.fromarray(rgb).save(OUT / "junction_overlay.png")
print("wrote demos/out/boundary.png and demos/out/junction_overlay.png")
