"""Sample scenes, render them, and look at what the generator decides.

Run from the repo root:  python demos/01_scene_generation.py
Writes renders into demos/out/.
"""

from collections import Counter
from pathlib import Path

from PIL import Image

from geoforge.shapes import GenConfig, sample_scene, shape_bbox
from geoforge.render import render_scene

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# The default configuration mirrors the training-data recipe: a 1000x1000
# canvas, 2..8 shapes, and a 70% chance of attaching a short alphanumeric
# string to each shape.
config = GenConfig(count=8, master_seed=2024)

kind_counter = Counter()
for i in range(config.count):
    scene = sample_scene(config, i)
    kind_counter.update(s.kind.value for s in scene.shapes)

    raster = render_scene(scene)
    Image.fromarray(raster, mode="L").save(OUT / f"scene_{i}.png")

    print(f"scene {i}: {len(scene.shapes)} elements, seed {scene.seed}")
    for s in scene.shapes[:4]:
        x, y, w, h = shape_bbox(s)
        print(f"   {s.kind.value:<13} bbox=({x:7.1f},{y:7.1f},{w:6.1f},{h:6.1f})")

print("\nclass mix over all scenes:")
for kind, n in kind_counter.most_common():
    print(f"   {kind:<13} {n}")

# Determinism: the same (config, index) always gives the same scene.
again = sample_scene(config, 0)
assert again == sample_scene(config, 0)
print("\nresampling scene 0 reproduces it exactly; renders written to demos/out/")
