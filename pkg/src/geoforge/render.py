"""Deterministic rasterization of scenes: stroked outlines plus drawn text."""

from __future__ import annotations

import math

import numpy as np
from PIL import Image, ImageDraw

from .fonts import get_font
from .shapes import POLYGON_KINDS, Scene, ShapeKind, ShapeSpec

__all__ = ["render_scene", "outline_mask", "DEFAULT_STROKE"]

DEFAULT_STROKE = 2

BG = 255  # white paper
INK = 0


def _ellipse_polyline(spec: ShapeSpec, step_px: float = 1.5) -> list[tuple[float, float]]:
    """Dense closed polyline along a (possibly rotated) ellipse boundary."""
    a, b = spec.axes
    cx, cy = spec.center
    phi = math.radians(spec.rotation)
    cphi, sphi = math.cos(phi), math.sin(phi)
    # Ramanujan perimeter estimate just to pick a sample count.
    perim = math.pi * (3 * (a + b) - math.sqrt((3 * a + b) * (a + 3 * b)))
    n = max(32, int(perim / step_px))
    t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    ex = a * np.cos(t)
    ey = b * np.sin(t)
    xs = cx + ex * cphi - ey * sphi
    ys = cy + ex * sphi + ey * cphi
    return list(zip(xs.tolist(), ys.tolist()))


def _draw_outline(draw: ImageDraw.ImageDraw, spec: ShapeSpec, ink: int, stroke: int) -> None:
    if spec.kind is ShapeKind.CIRCLE:
        cx, cy = spec.center
        r = spec.radius
        draw.ellipse([cx - r, cy - r, cx + r, cy + r], outline=ink, width=stroke)
    elif spec.kind is ShapeKind.ELLIPSE:
        pts = _ellipse_polyline(spec)
        draw.line(pts + pts[:1], fill=ink, width=stroke, joint="curve")
    elif spec.kind in POLYGON_KINDS:
        pts = list(spec.vertices)
        draw.line(pts + pts[:1], fill=ink, width=stroke, joint="curve")
    else:
        raise ValueError(f"no outline for kind {spec.kind}")


def render_scene(scene: Scene, stroke: int = DEFAULT_STROKE) -> np.ndarray:
    """Grayscale uint8 raster (H, W): white background, stroked shapes, black text."""
    W, H = scene.canvas
    img = Image.new("L", (W, H), BG)
    draw = ImageDraw.Draw(img)
    for spec in scene.shapes:
        if spec.kind is ShapeKind.TEXT:
            draw.text(spec.anchor, spec.text, fill=INK, font=get_font(spec.font_size))
        else:
            _draw_outline(draw, spec, INK, stroke)
    return np.asarray(img, dtype=np.uint8)


def outline_mask(scene: Scene, stroke: int = DEFAULT_STROKE) -> np.ndarray:
    """Boolean (H, W) mask of the stroked outlines of all non-text shapes."""
    W, H = scene.canvas
    img = Image.new("L", (W, H), 0)
    draw = ImageDraw.Draw(img)
    for spec in scene.shapes:
        if spec.kind is not ShapeKind.TEXT:
            _draw_outline(draw, spec, 255, stroke)
    return np.asarray(img, dtype=np.uint8) > 0
