"""Encode junctions into the 60x60x33 grid target and decode them back.

Run from the repo root:  python demos/03_junction_grid_codec.py
"""

from pathlib import Path

import numpy as np

from geoforge.annotate import JunctionLabel
from geoforge.codec import DecodeThresholds, decode, encode, read_gjt, write_gjt

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

canvas = (1000, 1000)
labels = [
    JunctionLabel(x=505.0, y=505.0, branches=(90.0, 270.0)),
    JunctionLabel(x=123.4, y=86.25, branches=(12.0, 200.5, 310.0)),
]

target = encode(labels, canvas)
print(f"target tensor: shape {target.shape}, positive cells {int(target[..., 0].sum())}")

# Channel anatomy of the first junction's cell: (505, 505) -> cell (30, 30).
cell = target[30, 30]
print(f"cell (30,30): conf={cell[0]}, dx={cell[1]:+.3f}, dy={cell[2]:+.3f}")
print(f"   bin confidences {np.nonzero(cell[3:18])[0].tolist()}  (90 deg -> bin 3)")

decoded = decode(target, DecodeThresholds(), canvas)
for before, after in zip(sorted(labels, key=lambda j: j.x), sorted(decoded, key=lambda j: j.x)):
    dx = after.x - before.x
    dy = after.y - before.y
    print(f"round trip: ({before.x}, {before.y}) -> ({after.x:.6f}, {after.y:.6f})"
          f"  err ({dx:+.1e}, {dy:+.1e})")

# The GJT1 file format round-trips bit for bit.
path = OUT / "example.gjt"
write_gjt(path, target)
assert np.array_equal(read_gjt(path), target)
print(f"wrote {path} ({path.stat().st_size} bytes), re-read identical")
