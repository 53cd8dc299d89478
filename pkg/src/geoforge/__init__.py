"""geoforge: deterministic synthetic-geometry data engine and numeric toolkit.

Submodules
----------
shapes    scene sampling (shape specs, configs, per-image PRNG streams)
render    rasterization of scenes and outline masks
geometry  analytic curve intersections with tangent directions
annotate  junction extraction and boundary heatmaps, plus their file formats
codec     60x60x33 junction grid encode/decode and the GJT1 binary format
losses    multi-task loss kernels (optimized) and losses_ref (naive oracle)
router    feature-router math: pooling, gating, fusion, token ops, projectors
metrics   IoU / mAP, junction precision-recall, boundary F1
dataset   COCO-style persistence, dataset generation, manifests
cli       `geoforge` command-line entry points
"""

__version__ = "0.1.0"
