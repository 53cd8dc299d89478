"""Scene sampling: parametric shape specs and their deterministic generation.

A scene is a set of geometric primitives (6 shape classes) plus optional
alphanumeric text elements on a pixel canvas. Everything downstream (render,
ground truth, dataset files) is a pure function of the sampled scene, and the
scene itself is a pure function of (config, image_index).
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .fonts import text_extent

__all__ = [
    "ShapeKind",
    "ShapeSpec",
    "Scene",
    "GenConfig",
    "PlacementError",
    "DegenerateShapeError",
    "GEOMETRIC_KINDS",
    "CATEGORY_IDS",
    "sample_scene",
    "shape_bbox",
    "image_rng",
    "polygon_signed_area",
]


class ShapeKind(str, Enum):
    CIRCLE = "circle"
    ELLIPSE = "ellipse"
    RECTANGLE = "rectangle"
    TRIANGLE = "triangle"
    PARALLELOGRAM = "parallelogram"
    TRAPEZOID = "trapezoid"
    TEXT = "text"


GEOMETRIC_KINDS: tuple[ShapeKind, ...] = (
    ShapeKind.CIRCLE,
    ShapeKind.ELLIPSE,
    ShapeKind.RECTANGLE,
    ShapeKind.TRIANGLE,
    ShapeKind.PARALLELOGRAM,
    ShapeKind.TRAPEZOID,
)

POLYGON_KINDS = frozenset(
    (ShapeKind.RECTANGLE, ShapeKind.TRIANGLE, ShapeKind.PARALLELOGRAM, ShapeKind.TRAPEZOID)
)

# Category table used by the COCO writer; ids 1..7 in this fixed order.
CATEGORY_IDS: dict[ShapeKind, int] = {
    ShapeKind.CIRCLE: 1,
    ShapeKind.ELLIPSE: 2,
    ShapeKind.RECTANGLE: 3,
    ShapeKind.TRIANGLE: 4,
    ShapeKind.PARALLELOGRAM: 5,
    ShapeKind.TRAPEZOID: 6,
    ShapeKind.TEXT: 7,
}

ALNUM = string.ascii_uppercase + string.ascii_lowercase + string.digits


class PlacementError(RuntimeError):
    """Raised when a shape cannot be placed in-bounds after bounded retries."""


class DegenerateShapeError(ValueError):
    """Raised for zero-area or otherwise degenerate shape parameters."""


@dataclass(frozen=True)
class ShapeSpec:
    """One parametric scene element. Fields are kind-specific; unused ones stay None.

    circle:   center, radius
    ellipse:  center, axes=(a, b) semi-axes, rotation in degrees
    polygons: vertices, ordered counter-clockwise (positive shoelace sum) and simple
    text:     anchor (left-ascender draw point), text, font_size
    """

    kind: ShapeKind
    id: int
    center: tuple[float, float] | None = None
    radius: float | None = None
    axes: tuple[float, float] | None = None
    rotation: float = 0.0
    vertices: tuple[tuple[float, float], ...] | None = None
    anchor: tuple[float, float] | None = None
    text: str | None = None
    font_size: int | None = None

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value, "id": self.id}
        if self.kind is ShapeKind.CIRCLE:
            d.update(center=list(self.center), radius=self.radius)
        elif self.kind is ShapeKind.ELLIPSE:
            d.update(center=list(self.center), axes=list(self.axes), rotation=self.rotation)
        elif self.kind in POLYGON_KINDS:
            d.update(vertices=[list(v) for v in self.vertices])
        else:
            d.update(anchor=list(self.anchor), text=self.text, font_size=self.font_size)
        return d

    @staticmethod
    def from_dict(d: dict) -> "ShapeSpec":
        kind = ShapeKind(d["kind"])
        if kind is ShapeKind.CIRCLE:
            return ShapeSpec(kind, d["id"], center=tuple(d["center"]), radius=d["radius"])
        if kind is ShapeKind.ELLIPSE:
            return ShapeSpec(
                kind,
                d["id"],
                center=tuple(d["center"]),
                axes=tuple(d["axes"]),
                rotation=d["rotation"],
            )
        if kind in POLYGON_KINDS:
            return ShapeSpec(kind, d["id"], vertices=tuple(tuple(v) for v in d["vertices"]))
        return ShapeSpec(
            kind, d["id"], anchor=tuple(d["anchor"]), text=d["text"], font_size=d["font_size"]
        )


@dataclass(frozen=True)
class Scene:
    canvas: tuple[int, int]  # (W, H) pixels
    shapes: tuple[ShapeSpec, ...]
    seed: int

    def to_dict(self) -> dict:
        return {
            "canvas": list(self.canvas),
            "seed": self.seed,
            "shapes": [s.to_dict() for s in self.shapes],
        }

    @staticmethod
    def from_dict(d: dict) -> "Scene":
        return Scene(
            canvas=tuple(d["canvas"]),
            shapes=tuple(ShapeSpec.from_dict(s) for s in d["shapes"]),
            seed=d["seed"],
        )


@dataclass(frozen=True)
class GenConfig:
    """Generation parameters; the (config, master_seed) pair fixes the whole dataset."""

    count: int = 1
    canvas_size: tuple[int, int] = (1000, 1000)
    shapes_min: int = 2
    shapes_max: int = 8
    text_prob: float = 0.7
    class_weights: tuple[float, ...] = (1.0,) * 6  # over GEOMETRIC_KINDS
    master_seed: int = 0

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.shapes_min < 1:
            raise ValueError("shapes_min must be >= 1")
        if self.shapes_max < self.shapes_min:
            raise ValueError("shapes_max must be >= shapes_min")
        if not 0.0 <= self.text_prob <= 1.0:
            raise ValueError("text_prob must be within [0, 1]")
        if len(self.class_weights) != len(GEOMETRIC_KINDS):
            raise ValueError("class_weights must have 6 entries")
        if any(w < 0 for w in self.class_weights) or sum(self.class_weights) <= 0:
            raise ValueError("class_weights must be non-negative and sum > 0")
        if min(self.canvas_size) < 16:
            raise ValueError("canvas too small")

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "canvas_size": list(self.canvas_size),
            "shapes_min": self.shapes_min,
            "shapes_max": self.shapes_max,
            "text_prob": self.text_prob,
            "class_weights": list(self.class_weights),
            "master_seed": self.master_seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "GenConfig":
        return GenConfig(
            count=d["count"],
            canvas_size=tuple(d["canvas_size"]),
            shapes_min=d["shapes_min"],
            shapes_max=d["shapes_max"],
            text_prob=d["text_prob"],
            class_weights=tuple(d["class_weights"]),
            master_seed=d["master_seed"],
        )


def image_rng(master_seed: int, image_index: int) -> tuple[np.random.Generator, int]:
    """Per-image PRNG stream, independent of generation order.

    Streams are split from the master seed with a spawn key, so image k's
    stream never depends on how many other images were generated first.
    Returns the generator and a 64-bit scene seed derived from the same split.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(image_index,))
    seed64 = int(ss.generate_state(1, np.uint64)[0])
    return np.random.Generator(np.random.PCG64(ss)), seed64


def polygon_signed_area(vertices) -> float:
    """Shoelace sum; positive means counter-clockwise in the stored (x, y) frame."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _ensure_ccw(vertices: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    if polygon_signed_area(vertices) < 0:
        vertices = vertices[::-1]
    return tuple((float(x), float(y)) for x, y in vertices)


def _rotated_ellipse_extents(a: float, b: float, rotation_deg: float) -> tuple[float, float]:
    # Tight half-extents of a rotated ellipse: hw = sqrt(a^2 cos^2 + b^2 sin^2), etc.
    phi = math.radians(rotation_deg)
    c, s = math.cos(phi), math.sin(phi)
    hw = math.sqrt((a * c) ** 2 + (b * s) ** 2)
    hh = math.sqrt((a * s) ** 2 + (b * c) ** 2)
    return hw, hh


def shape_bbox(shape: ShapeSpec) -> tuple[float, float, float, float]:
    """Tight axis-aligned (x, y, w, h) box of a shape; text uses glyph extents."""
    if shape.kind is ShapeKind.CIRCLE:
        if shape.radius is None or shape.radius <= 0:
            raise DegenerateShapeError("circle radius must be > 0")
        cx, cy = shape.center
        r = shape.radius
        return (cx - r, cy - r, 2 * r, 2 * r)
    if shape.kind is ShapeKind.ELLIPSE:
        a, b = shape.axes
        if a <= 0 or b <= 0:
            raise DegenerateShapeError("ellipse semi-axes must be > 0")
        hw, hh = _rotated_ellipse_extents(a, b, shape.rotation)
        cx, cy = shape.center
        return (cx - hw, cy - hh, 2 * hw, 2 * hh)
    if shape.kind in POLYGON_KINDS:
        if abs(polygon_signed_area(shape.vertices)) <= 0.0:
            raise DegenerateShapeError("polygon has zero area")
        v = np.asarray(shape.vertices, dtype=float)
        x0, y0 = v.min(axis=0)
        x1, y1 = v.max(axis=0)
        return (float(x0), float(y0), float(x1 - x0), float(y1 - y0))
    # text
    if not shape.text or shape.font_size is None or shape.font_size <= 0:
        raise DegenerateShapeError("text shape needs a non-empty string and font size")
    dx0, dy0, w, h = text_extent(shape.text, shape.font_size)
    if w <= 0 or h <= 0:
        raise DegenerateShapeError("text renders to an empty box")
    ax, ay = shape.anchor
    return (ax + dx0, ay + dy0, w, h)


def _bbox_in_canvas(bbox, canvas, pad: float = 1.0) -> bool:
    x, y, w, h = bbox
    W, H = canvas
    return x >= pad and y >= pad and x + w <= W - pad and y + h <= H - pad


MAX_PLACE_RETRIES = 100


def _sample_geometry(kind: ShapeKind, rng: np.random.Generator, canvas) -> ShapeSpec | None:
    """One placement attempt; None if the draw landed out of bounds."""
    W, H = canvas
    s = min(W, H)

    if kind is ShapeKind.CIRCLE:
        r = rng.uniform(0.03, 0.12) * s
        cx = rng.uniform(0, W)
        cy = rng.uniform(0, H)
        spec = ShapeSpec(kind, -1, center=(cx, cy), radius=r)
    elif kind is ShapeKind.ELLIPSE:
        a = rng.uniform(0.05, 0.14) * s
        b = a * rng.uniform(0.3, 0.85)  # visibly non-circular, never needle-thin
        rot = rng.uniform(0.0, 180.0)
        cx = rng.uniform(0, W)
        cy = rng.uniform(0, H)
        spec = ShapeSpec(kind, -1, center=(cx, cy), axes=(a, b), rotation=rot)
    elif kind is ShapeKind.RECTANGLE:
        w = rng.uniform(0.06, 0.25) * s
        h = rng.uniform(0.06, 0.25) * s
        x = rng.uniform(0, W - w)
        y = rng.uniform(0, H - h)
        verts = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)]
        spec = ShapeSpec(kind, -1, vertices=_ensure_ccw(verts))
    elif kind is ShapeKind.TRIANGLE:
        bw = rng.uniform(0.08, 0.28) * s
        bh = rng.uniform(0.08, 0.28) * s
        x = rng.uniform(0, W - bw)
        y = rng.uniform(0, H - bh)
        pts = [(x + rng.uniform(0, bw), y + rng.uniform(0, bh)) for _ in range(3)]
        if abs(polygon_signed_area(pts)) < 0.15 * bw * bh:
            return None
        spec = ShapeSpec(kind, -1, vertices=_ensure_ccw(pts))
    elif kind is ShapeKind.PARALLELOGRAM:
        l1 = rng.uniform(0.08, 0.22) * s
        l2 = rng.uniform(0.08, 0.22) * s
        t1 = rng.uniform(0.0, 2 * math.pi)
        t2 = t1 + math.radians(rng.uniform(35.0, 145.0))
        v1 = (l1 * math.cos(t1), l1 * math.sin(t1))
        v2 = (l2 * math.cos(t2), l2 * math.sin(t2))
        px = rng.uniform(0, W)
        py = rng.uniform(0, H)
        verts = [
            (px, py),
            (px + v1[0], py + v1[1]),
            (px + v1[0] + v2[0], py + v1[1] + v2[1]),
            (px + v2[0], py + v2[1]),
        ]
        spec = ShapeSpec(kind, -1, vertices=_ensure_ccw(verts))
    elif kind is ShapeKind.TRAPEZOID:
        w0 = rng.uniform(0.10, 0.28) * s
        w1 = w0 * rng.uniform(0.35, 0.8)
        h = rng.uniform(0.08, 0.20) * s
        x0 = rng.uniform(0, W - w0)
        y0 = rng.uniform(0, H - h)
        slack = (w0 - w1) / 2.0
        xt = x0 + slack + rng.uniform(-slack, slack)
        verts = [(x0, y0 + h), (x0 + w0, y0 + h), (xt + w1, y0), (xt, y0)]
        spec = ShapeSpec(kind, -1, vertices=_ensure_ccw(verts))
    else:
        raise ValueError(f"not a geometric kind: {kind}")

    if not _bbox_in_canvas(shape_bbox(spec), canvas):
        return None
    return spec


def _shape_centroid(shape: ShapeSpec) -> tuple[float, float]:
    if shape.center is not None:
        return shape.center
    v = np.asarray(shape.vertices, dtype=float)
    return (float(v[:, 0].mean()), float(v[:, 1].mean()))


def _sample_text_for(shape: ShapeSpec, rng: np.random.Generator, canvas) -> ShapeSpec | None:
    """Random alphanumeric string placed inside or adjacent to the host shape."""
    W, H = canvas
    for _ in range(MAX_PLACE_RETRIES):
        n = int(rng.integers(1, 11))
        txt = "".join(ALNUM[i] for i in rng.integers(0, len(ALNUM), size=n))
        # Larger strings get proportionally smaller glyphs.
        font_size = max(8, round(28 * min(1.0, 6.0 / n)))
        dx0, dy0, tw, th = text_extent(txt, font_size)
        sx, sy, sw, sh = shape_bbox(shape)
        if rng.random() < 0.5:  # inside, near the centroid
            cx, cy = _shape_centroid(shape)
            cx += rng.uniform(-0.2, 0.2) * sw
            cy += rng.uniform(-0.2, 0.2) * sh
        else:  # adjacent, just off one side of the host bbox
            gap = 4.0
            side = int(rng.integers(0, 4))
            if side == 0:
                cx, cy = sx - gap - tw / 2, sy + rng.uniform(0, sh)
            elif side == 1:
                cx, cy = sx + sw + gap + tw / 2, sy + rng.uniform(0, sh)
            elif side == 2:
                cx, cy = sx + rng.uniform(0, sw), sy - gap - th / 2
            else:
                cx, cy = sx + rng.uniform(0, sw), sy + sh + gap + th / 2
        anchor = (cx - dx0 - tw / 2, cy - dy0 - th / 2)
        spec = ShapeSpec(ShapeKind.TEXT, -1, anchor=anchor, text=txt, font_size=font_size)
        if _bbox_in_canvas(shape_bbox(spec), canvas):
            return spec
    return None


def sample_scene(config: GenConfig, image_index: int) -> Scene:
    """Sample one scene; deterministic in (config, image_index)."""
    if image_index < 0 or image_index >= config.count:
        raise ValueError(f"image_index {image_index} outside [0, {config.count})")
    rng, seed64 = image_rng(config.master_seed, image_index)
    W, H = config.canvas_size

    n_shapes = int(rng.integers(config.shapes_min, config.shapes_max + 1))
    weights = np.asarray(config.class_weights, dtype=float)
    weights = weights / weights.sum()

    shapes: list[ShapeSpec] = []
    next_id = 0
    for _ in range(n_shapes):
        kind = GEOMETRIC_KINDS[int(rng.choice(len(GEOMETRIC_KINDS), p=weights))]
        placed = None
        for _ in range(MAX_PLACE_RETRIES):
            placed = _sample_geometry(kind, rng, (W, H))
            if placed is not None:
                break
        if placed is None:
            raise PlacementError(
                f"could not place a {kind.value} on a {W}x{H} canvas "
                f"after {MAX_PLACE_RETRIES} retries (image {image_index})"
            )
        placed = replace(placed, id=next_id)
        next_id += 1
        shapes.append(placed)

        if rng.random() < config.text_prob:
            txt = _sample_text_for(placed, rng, (W, H))
            if txt is not None:
                shapes.append(replace(txt, id=next_id))
                next_id += 1

    return Scene(canvas=(W, H), shapes=tuple(shapes), seed=seed64)
