"""Routing pooled pyramid features and fusing them with the general branch.

Run from the repo root:  python demos/05_feature_router.py
"""

import numpy as np

from geoforge.router import (
    RouterMode,
    append_tokens,
    fuse,
    make_projector,
    make_router_params,
    pool_concat,
    project,
    resize_tokens,
    route,
)

rng = np.random.default_rng(1)

# Four routed pyramid levels (256 channels) and one general branch (1024).
geo = [rng.normal(0, 1, (256, 8, 8)) for _ in range(4)]
clip = rng.normal(0, 1, (1024, 8, 8))

pooled = pool_concat(geo, clip)
print(f"pooled vector: {pooled.shape[0]} wide")

for mode in RouterMode:
    params = make_router_params(mode, seed=42)
    w = route(pooled, params)
    print(f"{mode.value:<13} w = {np.round(w, 4)}  sum={w.sum():.4f}")

params = make_router_params(RouterMode.SOFT_SOFTMAX, seed=42)
w = route(pooled, params)

summed = fuse(geo, clip, w, "sum", params)
stacked = fuse(geo, clip, w, "concat", params)
print(f"sum fusion    -> {summed.shape}  (geo prompt, joins clip along the sequence)")
print(f"concat fusion -> {stacked.shape}  (5120 channels, sequence length kept)")

# Sequence-wise variant: shrink geo tokens to a fraction of the clip tokens,
# then project each stream into the text embedding width.
clip_tokens = clip.reshape(1024, -1).T           # 64 tokens
geo_tokens = summed.reshape(1024, -1).T
for frac in (0.15, 0.20, 0.25, 0.40):
    print(f"resize fraction {frac}: {resize_tokens(geo_tokens, frac, len(clip_tokens)).shape[0]} tokens")

clip_proj, geo_proj = make_projector("sequence_dual", seed=0)
shrunk = resize_tokens(geo_tokens, 0.25, len(clip_tokens))
sequence = append_tokens(project(clip_tokens, clip_proj), project(shrunk, geo_proj))
print(f"sequence fusion output: {sequence.shape}")

single = make_projector("channel_single", seed=0)
channel = project(stacked.reshape(5120, -1).T, single)
print(f"channel fusion output:  {channel.shape}")
