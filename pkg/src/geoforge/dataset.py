"""Dataset persistence: COCO-style labels, per-image ground-truth files, manifest.

Output layout under the dataset root:

    images/img_XXXXXX.png      rendered scene (8-bit grayscale)
    labels/coco.json           detection annotations for every image
    junctions/img_XXXXXX.json  junction records [{x, y, branches}, ...]
    boundaries/img_XXXXXX.png  boundary heatmap, value = round(255 * h)
    targets/img_XXXXXX.gjt     encoded junction grid target (GJT1)
    manifest.json              config echo + per-image records + SHA-256 hashes

Everything is a pure function of (GenConfig, tool version): no timestamps,
canonical JSON, fixed PNG encoder settings. The manifest hash therefore
verifies byte-level reproducibility of the whole dataset.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from PIL import Image

from . import __version__
from .annotate import (
    DEFAULT_SIGMA,
    boundary_heatmap,
    extract_junctions,
    save_boundary_png,
    save_junctions,
)
from .codec import encode, write_gjt
from .render import DEFAULT_STROKE, render_scene
from .shapes import CATEGORY_IDS, GenConfig, Scene, ShapeKind, sample_scene, shape_bbox

__all__ = [
    "CATEGORY_NAMES",
    "coco_categories",
    "scene_annotations",
    "build_coco",
    "write_coco",
    "generate_dataset",
    "verify_manifest",
    "validate_coco",
    "manifest_hash",
    "load_manifest",
]

CATEGORY_NAMES = (
    "circle",
    "ellipse",
    "rectangle",
    "triangle",
    "parallelogram",
    "trapezoid",
    "text",
)

MANIFEST_FORMAT = "geoforge-manifest-v1"


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, separators=(",", ":")))


def coco_categories() -> list[dict]:
    return [{"id": i + 1, "name": name} for i, name in enumerate(CATEGORY_NAMES)]


def scene_annotations(scene: Scene) -> list[dict]:
    """Category + bbox per shape, in shape-id order (annotation ids added later)."""
    anns = []
    for shape in scene.shapes:
        x, y, w, h = shape_bbox(shape)
        anns.append(
            {
                "category_id": CATEGORY_IDS[shape.kind],
                "bbox": [x, y, w, h],
                "area": w * h,
                "iscrowd": 0,
            }
        )
    return anns


def build_coco(images: list[dict], annotations_per_image: list[list[dict]]) -> dict:
    """Assemble the COCO document; ids are assigned here so they stay canonical."""
    img_ids = [im["id"] for im in images]
    if len(set(img_ids)) != len(img_ids):
        raise ValueError("duplicate image ids")
    annotations = []
    next_id = 1
    for im, anns in zip(images, annotations_per_image):
        for a in anns:
            annotations.append({"id": next_id, "image_id": im["id"], **a})
            next_id += 1
    return {"images": images, "annotations": annotations, "categories": coco_categories()}


def write_coco(path: str | Path, images: list[dict], annotations_per_image: list[list[dict]]) -> dict:
    doc = build_coco(images, annotations_per_image)
    _dump_json(Path(path), doc)
    return doc


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _image_name(index: int) -> str:
    return f"img_{index:06d}"


def _generate_image(args: tuple) -> dict:
    """Worker: render + annotate + encode one image, write its files."""
    cfg_dict, index, out_dir, stroke, sigma = args
    config = GenConfig.from_dict(cfg_dict)
    root = Path(out_dir)
    name = _image_name(index)

    scene = sample_scene(config, index)
    raster = render_scene(scene, stroke=stroke)
    junctions = extract_junctions(scene)
    heat = boundary_heatmap(scene, stroke=stroke, sigma=sigma)
    target = encode(junctions, scene.canvas)

    image_rel = f"images/{name}.png"
    junction_rel = f"junctions/{name}.json"
    boundary_rel = f"boundaries/{name}.png"
    target_rel = f"targets/{name}.gjt"

    Image.fromarray(raster, mode="L").save(root / image_rel, compress_level=1)
    save_junctions(root / junction_rel, junctions)
    save_boundary_png(root / boundary_rel, heat)
    write_gjt(root / target_rel, target)

    W, H = scene.canvas
    record = {
        "index": index,
        "image": image_rel,
        "junctions": junction_rel,
        "boundary": boundary_rel,
        "target": target_rel,
        "num_junctions": len(junctions),
    }
    hashes = {rel: _sha256_file(root / rel) for rel in (image_rel, junction_rel, boundary_rel, target_rel)}
    coco_image = {"id": index, "file_name": image_rel, "width": W, "height": H}
    return {
        "record": record,
        "hashes": hashes,
        "coco_image": coco_image,
        "coco_anns": scene_annotations(scene),
    }


def generate_dataset(
    config: GenConfig,
    out_dir: str | Path,
    workers: int | None = None,
    stroke: int = DEFAULT_STROKE,
    sigma: float = DEFAULT_SIGMA,
) -> dict:
    """Generate the full dataset and return the manifest (also written to disk)."""
    root = Path(out_dir)
    for sub in ("images", "labels", "junctions", "boundaries", "targets"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    jobs = [(config.to_dict(), i, str(root), stroke, sigma) for i in range(config.count)]
    if workers is None or workers <= 1 or config.count < 2:
        results = [_generate_image(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_generate_image, jobs, chunksize=16))

    results.sort(key=lambda r: r["record"]["index"])
    coco = write_coco(
        root / "labels" / "coco.json",
        [r["coco_image"] for r in results],
        [r["coco_anns"] for r in results],
    )

    files: dict[str, str] = {}
    for r in results:
        files.update(r["hashes"])
    files["labels/coco.json"] = _sha256_file(root / "labels" / "coco.json")

    manifest = {
        "format": MANIFEST_FORMAT,
        "tool_version": __version__,
        "config": config.to_dict(),
        "stroke": stroke,
        "sigma": sigma,
        "images": [r["record"] for r in results],
        "files": dict(sorted(files.items())),
        "num_annotations": len(coco["annotations"]),
    }
    _dump_json(root / "manifest.json", manifest)
    return manifest


def load_manifest(out_dir: str | Path) -> dict:
    return json.loads((Path(out_dir) / "manifest.json").read_text())


def manifest_hash(out_dir: str | Path) -> str:
    """SHA-256 of the manifest file bytes: the dataset's reproducibility stamp."""
    return hashlib.sha256((Path(out_dir) / "manifest.json").read_bytes()).hexdigest()


def verify_manifest(out_dir: str | Path) -> None:
    """Check every referenced file exists and matches its recorded hash."""
    root = Path(out_dir)
    manifest = load_manifest(root)
    for rel, expected in manifest["files"].items():
        p = root / rel
        if not p.exists():
            raise FileNotFoundError(f"manifest references missing file {rel}")
        actual = _sha256_file(p)
        if actual != expected:
            raise ValueError(f"hash mismatch for {rel}: {actual} != {expected}")


def validate_coco(doc: dict) -> None:
    """Structural checks for the documented COCO-style schema; raises on violation."""
    for key in ("images", "annotations", "categories"):
        if key not in doc:
            raise ValueError(f"missing top-level key {key!r}")
    cats = doc["categories"]
    if [c["id"] for c in cats] != list(range(1, 8)):
        raise ValueError("categories must have ids 1..7")
    if tuple(c["name"] for c in cats) != CATEGORY_NAMES:
        raise ValueError("category names/order mismatch")

    sizes: dict[int, tuple[int, int]] = {}
    img_ids = set()
    for im in doc["images"]:
        for key in ("id", "file_name", "width", "height"):
            if key not in im:
                raise ValueError(f"image entry missing {key!r}")
        if im["id"] in img_ids:
            raise ValueError(f"duplicate image id {im['id']}")
        img_ids.add(im["id"])
        sizes[im["id"]] = (im["width"], im["height"])

    ann_ids = set()
    for a in doc["annotations"]:
        for key in ("id", "image_id", "category_id", "bbox", "area", "iscrowd"):
            if key not in a:
                raise ValueError(f"annotation entry missing {key!r}")
        if a["id"] in ann_ids:
            raise ValueError(f"duplicate annotation id {a['id']}")
        ann_ids.add(a["id"])
        if a["image_id"] not in img_ids:
            raise ValueError(f"annotation {a['id']} references unknown image")
        if not 1 <= a["category_id"] <= 7:
            raise ValueError(f"annotation {a['id']} has invalid category")
        x, y, w, h = a["bbox"]
        W, H = sizes[a["image_id"]]
        if not (0 <= x and 0 <= y and x + w <= W and y + h <= H and w > 0 and h > 0):
            raise ValueError(f"annotation {a['id']} bbox {a['bbox']} out of bounds")
        if abs(a["area"] - w * h) > 1e-6 * max(1.0, w * h):
            raise ValueError(f"annotation {a['id']} area != w*h")
