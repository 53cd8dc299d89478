"""Exact ground truth from scene parameters: junctions and boundary heatmaps.

Junctions are the union of curve crossings between different shapes and the
corner points of polygon outlines; text elements contribute nothing. The
boundary target is a Gaussian profile of the exact distance to the stroked
outline mask, hard-cut at 3 sigma, which makes the map of a scene union the
pixelwise max of the individual maps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import DegenerateIntersectionError, intersect_primitives, shape_curves
from .render import DEFAULT_STROKE, outline_mask
from .shapes import Scene, ShapeKind

__all__ = [
    "JunctionLabel",
    "extract_junctions",
    "junctions_from_curve_groups",
    "boundary_heatmap",
    "MERGE_EPS",
    "DEFAULT_SIGMA",
    "validate_junction_label",
    "junctions_to_json",
    "junctions_from_json",
    "save_junctions",
    "load_junctions",
    "save_boundary_png",
    "load_boundary_png",
]

MERGE_EPS = 1.5  # px; junctions closer than this collapse into one
ANGLE_DEDUP_EPS = 1e-6  # degrees
DEFAULT_SIGMA = 1.0


@dataclass(frozen=True)
class JunctionLabel:
    """A junction: continuous position plus outgoing branch angles in degrees.

    ``conf`` is populated on decoded predictions; ground-truth labels leave it
    None.
    """

    x: float
    y: float
    branches: tuple[float, ...]
    conf: float | None = None


def validate_junction_label(j: JunctionLabel, canvas: tuple[int, int]) -> None:
    W, H = canvas
    if not (0 <= j.x < W and 0 <= j.y < H):
        raise ValueError(f"junction ({j.x}, {j.y}) outside canvas {canvas}")
    if len(j.branches) == 0:
        raise ValueError("ground-truth junction needs at least one branch")
    if list(j.branches) != sorted(j.branches):
        raise ValueError("branches must be sorted ascending")
    for t in j.branches:
        if not (0.0 <= t < 360.0):
            raise ValueError(f"branch angle {t} outside [0, 360)")


def _dedup_angles(angles) -> tuple[float, ...]:
    """Sort and drop angles equal within tolerance, treating 0/360 as adjacent."""
    out: list[float] = []
    for t in sorted(a % 360.0 for a in angles):
        if out and t - out[-1] <= ANGLE_DEDUP_EPS:
            continue
        out.append(t)
    if len(out) > 1 and (out[0] + 360.0) - out[-1] <= ANGLE_DEDUP_EPS:
        out.pop()
    return tuple(out)


def _corner_junctions(scene: Scene) -> list[tuple[float, float, tuple[float, ...]]]:
    corners = []
    for shape in scene.shapes:
        if shape.vertices is None:
            continue
        v = shape.vertices
        n = len(v)
        for i in range(n):
            x, y = v[i]
            px, py = v[(i - 1) % n]
            nx, ny = v[(i + 1) % n]
            b1 = math.degrees(math.atan2(py - y, px - x)) % 360.0
            b2 = math.degrees(math.atan2(ny - y, nx - x)) % 360.0
            corners.append((x, y, _dedup_angles((b1, b2))))
    return corners


def junctions_from_curve_groups(
    groups: list[tuple],
    corners: list[tuple[float, float, tuple[float, ...]]] | None = None,
) -> list[JunctionLabel]:
    """Junctions from pairwise crossings between curve groups, merged and sorted.

    Each group is the boundary-curve set of one entity; curves inside a group
    are never intersected with each other. Degenerate (coincident) pairs are
    skipped. ``corners`` supplies extra raw junctions, e.g. polygon vertices.
    """
    raw: list[tuple[float, float, tuple[float, ...]]] = []
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            for ca in groups[i]:
                for cb in groups[j]:
                    try:
                        hits = intersect_primitives(ca, cb)
                    except DegenerateIntersectionError:
                        continue
                    for h in hits:
                        raw.append((h.point[0], h.point[1], h.dirs_a + h.dirs_b))
    if corners:
        raw.extend(corners)
    if not raw:
        return []

    # Merge near-coincident junctions (union-find over the <eps graph).
    pts = np.asarray([(r[0], r[1]) for r in raw])
    n = len(raw)
    parent = list(range(n))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    for i, j in zip(*np.nonzero(d2 < MERGE_EPS * MERGE_EPS)):
        if i < j:
            ri, rj = find(int(i)), find(int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

    clusters: dict[int, list[int]] = {}
    for k in range(n):
        clusters.setdefault(find(k), []).append(k)

    out: list[JunctionLabel] = []
    for members in clusters.values():
        sub = pts[members]
        centroid = sub.mean(axis=0)
        dist = np.hypot(sub[:, 0] - centroid[0], sub[:, 1] - centroid[1])
        order = sorted(range(len(members)), key=lambda k: (dist[k], sub[k, 0], sub[k, 1]))
        rep = members[order[0]]
        branches = _dedup_angles([t for m in members for t in raw[m][2]])
        out.append(JunctionLabel(x=raw[rep][0], y=raw[rep][1], branches=branches))

    out.sort(key=lambda j: (j.x, j.y))
    return out


def extract_junctions(scene: Scene) -> list[JunctionLabel]:
    """All junctions of a scene: inter-shape crossings plus polygon corners."""
    groups = [shape_curves(s) for s in scene.shapes if s.kind is not ShapeKind.TEXT]
    return junctions_from_curve_groups(groups, corners=_corner_junctions(scene))


def _gaussian_distance_profile(mask: np.ndarray, sigma: float) -> np.ndarray:
    """exp(-d^2 / 2 sigma^2) of the exact distance to the mask, zero beyond 3 sigma.

    Squared distances between grid pixels are integers, so sweeping every
    integer offset inside the cutoff radius and keeping the max weight equals
    an exact euclidean distance transform followed by the Gaussian, at a
    fraction of the cost.
    """
    R = int(math.floor(3.0 * sigma + 1e-9))
    R2 = (3.0 * sigma) ** 2 + 1e-9
    H, W = mask.shape
    h = np.zeros((H, W), dtype=np.float32)
    h[mask] = np.float32(1.0)
    for dy in range(-R, R + 1):
        for dx in range(-R, R + 1):
            d2 = dy * dy + dx * dx
            if d2 == 0 or d2 > R2:
                continue
            w = np.float32(math.exp(-d2 / (2.0 * sigma * sigma)))
            dst = h[max(0, -dy) : H - max(0, dy), max(0, -dx) : W - max(0, dx)]
            src = mask[max(0, dy) : H - max(0, -dy), max(0, dx) : W - max(0, -dx)]
            np.maximum(dst, w, out=dst, where=src)
    return h


def boundary_heatmap(
    scene: Scene, stroke: int = DEFAULT_STROKE, sigma: float = DEFAULT_SIGMA
) -> np.ndarray:
    """Float32 (H, W) map in [0, 1]: Gaussian distance profile of shape outlines.

    sigma = 0 returns the bare binary stroke mask. The profile is exactly zero
    beyond 3 sigma from the stroke, and the max is 1 whenever any non-text
    shape exists.
    """
    if stroke < 1:
        raise ValueError("stroke must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    mask = outline_mask(scene, stroke)
    if sigma == 0 or not mask.any():
        return mask.astype(np.float32)
    return _gaussian_distance_profile(mask, sigma)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def junctions_to_json(junctions: list[JunctionLabel]) -> list[dict]:
    recs = []
    for j in junctions:
        rec = {"x": j.x, "y": j.y, "branches": list(j.branches)}
        if j.conf is not None:
            rec["conf"] = j.conf
        recs.append(rec)
    return recs


def junctions_from_json(records: list[dict]) -> list[JunctionLabel]:
    return [
        JunctionLabel(
            x=float(r["x"]),
            y=float(r["y"]),
            branches=tuple(float(t) for t in r["branches"]),
            conf=float(r["conf"]) if "conf" in r else None,
        )
        for r in records
    ]


def save_junctions(path: str | Path, junctions: list[JunctionLabel]) -> None:
    Path(path).write_text(
        json.dumps(junctions_to_json(junctions), sort_keys=True, separators=(",", ":"))
    )


def load_junctions(path: str | Path) -> list[JunctionLabel]:
    return junctions_from_json(json.loads(Path(path).read_text()))


def save_boundary_png(path: str | Path, heatmap: np.ndarray) -> None:
    """8-bit grayscale PNG with value = round(255 * h)."""
    arr = np.rint(np.clip(heatmap, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, compress_level=1)


def load_boundary_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.float32) / 255.0
