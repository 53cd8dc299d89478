"""Generate a small dataset end to end and poke at every artifact it writes.

Run from the repo root:  python demos/07_full_dataset_pipeline.py
Equivalent CLI:          geoforge gen --count 6 --seed 9 --canvas 512 --out demos/out/ds
"""

import json
from pathlib import Path

from geoforge.annotate import load_boundary_png, load_junctions
from geoforge.codec import DecodeThresholds, decode, read_gjt
from geoforge.dataset import generate_dataset, manifest_hash, verify_manifest
from geoforge.shapes import GenConfig

OUT = Path(__file__).parent / "out" / "ds"

config = GenConfig(count=6, canvas_size=(512, 512), master_seed=9)
manifest = generate_dataset(config, OUT)
print(f"dataset at {OUT}")
print(f"manifest hash {manifest_hash(OUT)}")
verify_manifest(OUT)
print("manifest hashes verify")

coco = json.loads((OUT / "labels" / "coco.json").read_text())
print(f"coco: {len(coco['images'])} images, {len(coco['annotations'])} annotations, "
      f"{len(coco['categories'])} categories")

rec = manifest["images"][0]
junctions = load_junctions(OUT / rec["junctions"])
target = read_gjt(OUT / rec["target"])
heat = load_boundary_png(OUT / rec["boundary"])
print(f"image 0: {len(junctions)} junctions, "
      f"{int(target[..., 0].sum())} positive grid cells, "
      f"boundary max {heat.max():.3f}")

decoded = decode(target, DecodeThresholds(), (512, 512))
print(f"decoding the stored target recovers {len(decoded)} junctions")
