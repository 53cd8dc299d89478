"""Analytic curve intersections with tangent directions at each crossing.

Shape outlines decompose into three boundary-curve kinds: straight segments,
circles, and (rotated) ellipses. Segment pairs and segment/circle pairs are
solved in closed form; conic pairs (ellipse-ellipse, circle-ellipse) are
located on dense polylines and then polished with 2-D Newton iterations on the
two implicit equations, so reported points sit on both curves to well below
1e-6 px.

Angles are degrees in [0, 360), measured from +x toward +y in the stored
pixel frame. Interior crossings contribute two opposite directions per curve;
a crossing at a segment endpoint contributes the single direction that points
into the segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .shapes import POLYGON_KINDS, ShapeKind, ShapeSpec

__all__ = [
    "Segment",
    "CircleCurve",
    "EllipseCurve",
    "Intersection",
    "DegenerateIntersectionError",
    "shape_curves",
    "intersect_primitives",
    "curve_distance",
]

# Discriminant treated as zero (tangency) below this, in normalized units.
TANGENCY_EPS = 1e-9
# Parameter slack for "on the segment" checks.
PARAM_EPS = 1e-9
# Positional tolerance for treating a hit as a segment endpoint.
ENDPOINT_EPS = 1e-6
# Max chord deviation when flattening conics for the candidate search.
FLATTEN_TOL = 0.25


class DegenerateIntersectionError(ValueError):
    """Coincident or overlapping curves: no finite intersection set exists."""


@dataclass(frozen=True)
class Segment:
    p0: tuple[float, float]
    p1: tuple[float, float]


@dataclass(frozen=True)
class CircleCurve:
    center: tuple[float, float]
    radius: float


@dataclass(frozen=True)
class EllipseCurve:
    center: tuple[float, float]
    axes: tuple[float, float]  # semi-axes (a, b)
    rotation: float  # degrees


Curve = Segment | CircleCurve | EllipseCurve


@dataclass(frozen=True)
class Intersection:
    point: tuple[float, float]
    dirs_a: tuple[float, ...]
    dirs_b: tuple[float, ...]


def shape_curves(shape: ShapeSpec) -> tuple[Curve, ...]:
    """Boundary curves of a shape; text contributes none."""
    if shape.kind is ShapeKind.CIRCLE:
        return (CircleCurve(shape.center, shape.radius),)
    if shape.kind is ShapeKind.ELLIPSE:
        return (EllipseCurve(shape.center, shape.axes, shape.rotation),)
    if shape.kind in POLYGON_KINDS:
        v = shape.vertices
        return tuple(Segment(v[i], v[(i + 1) % len(v)]) for i in range(len(v)))
    return ()


def _norm_deg(angle: float) -> float:
    return angle % 360.0


def _dir_pair(dx: float, dy: float) -> tuple[float, float]:
    t = _norm_deg(math.degrees(math.atan2(dy, dx)))
    return (t, _norm_deg(t + 180.0))


def _segment_dirs_at(seg: Segment, point: tuple[float, float]) -> tuple[float, ...]:
    dx = seg.p1[0] - seg.p0[0]
    dy = seg.p1[1] - seg.p0[1]
    if math.hypot(point[0] - seg.p0[0], point[1] - seg.p0[1]) <= ENDPOINT_EPS:
        return (_norm_deg(math.degrees(math.atan2(dy, dx))),)
    if math.hypot(point[0] - seg.p1[0], point[1] - seg.p1[1]) <= ENDPOINT_EPS:
        return (_norm_deg(math.degrees(math.atan2(-dy, -dx))),)
    return _dir_pair(dx, dy)


def _circle_dirs_at(c: CircleCurve, point: tuple[float, float]) -> tuple[float, ...]:
    ux = point[0] - c.center[0]
    uy = point[1] - c.center[1]
    return _dir_pair(-uy, ux)


def _ellipse_implicit(e: EllipseCurve, x: float, y: float) -> tuple[float, float, float]:
    """F(x, y) and its gradient for ((R(-phi)(p-c))_x/a)^2 + (.../b)^2 - 1."""
    a, b = e.axes
    phi = math.radians(e.rotation)
    cp, sp = math.cos(phi), math.sin(phi)
    dx, dy = x - e.center[0], y - e.center[1]
    u = (dx * cp + dy * sp) / a
    v = (-dx * sp + dy * cp) / b
    f = u * u + v * v - 1.0
    fx = 2.0 * u * cp / a - 2.0 * v * sp / b
    fy = 2.0 * u * sp / a + 2.0 * v * cp / b
    return f, fx, fy


def _ellipse_dirs_at(e: EllipseCurve, point: tuple[float, float]) -> tuple[float, ...]:
    _, fx, fy = _ellipse_implicit(e, point[0], point[1])
    return _dir_pair(-fy, fx)


def _curve_dirs_at(curve: Curve, point: tuple[float, float]) -> tuple[float, ...]:
    if isinstance(curve, Segment):
        return _segment_dirs_at(curve, point)
    if isinstance(curve, CircleCurve):
        return _circle_dirs_at(curve, point)
    return _ellipse_dirs_at(curve, point)


def curve_distance(curve: Curve, point: tuple[float, float]) -> float:
    """Distance from a point to the curve; first-order estimate for ellipses."""
    x, y = point
    if isinstance(curve, Segment):
        px, py = curve.p0
        qx, qy = curve.p1
        dx, dy = qx - px, qy - py
        L2 = dx * dx + dy * dy
        if L2 == 0.0:
            return math.hypot(x - px, y - py)
        t = max(0.0, min(1.0, ((x - px) * dx + (y - py) * dy) / L2))
        return math.hypot(x - (px + t * dx), y - (py + t * dy))
    if isinstance(curve, CircleCurve):
        return abs(math.hypot(x - curve.center[0], y - curve.center[1]) - curve.radius)
    f, fx, fy = _ellipse_implicit(curve, x, y)
    g = math.hypot(fx, fy)
    return abs(f) / g if g > 0 else abs(f)


# ---------------------------------------------------------------------------
# closed-form cases
# ---------------------------------------------------------------------------


def _seg_seg(a: Segment, b: Segment) -> list[tuple[float, float]]:
    ax, ay = a.p0
    adx, ady = a.p1[0] - ax, a.p1[1] - ay
    bx, by = b.p0
    bdx, bdy = b.p1[0] - bx, b.p1[1] - by
    den = adx * bdy - ady * bdx
    scale = max(math.hypot(adx, ady) * math.hypot(bdx, bdy), 1e-30)
    if abs(den) <= 1e-12 * scale:
        # Parallel: coincident overlap is degenerate, otherwise disjoint.
        cross = (bx - ax) * ady - (by - ay) * adx
        if abs(cross) <= 1e-9 * max(math.hypot(adx, ady), 1.0):
            L2 = adx * adx + ady * ady
            if L2 > 0:
                t0 = ((bx - ax) * adx + (by - ay) * ady) / L2
                t1 = ((b.p1[0] - ax) * adx + (b.p1[1] - ay) * ady) / L2
                lo, hi = min(t0, t1), max(t0, t1)
                if hi >= -PARAM_EPS and lo <= 1 + PARAM_EPS:
                    raise DegenerateIntersectionError("collinear overlapping segments")
        return []
    t = ((bx - ax) * bdy - (by - ay) * bdx) / den
    u = ((bx - ax) * ady - (by - ay) * adx) / den
    if -PARAM_EPS <= t <= 1 + PARAM_EPS and -PARAM_EPS <= u <= 1 + PARAM_EPS:
        return [(ax + t * adx, ay + t * ady)]
    return []


def _seg_quadratic_hits(
    p0: tuple[float, float], d: tuple[float, float], A: float, B: float, C: float
) -> list[float]:
    """Roots in [0, 1] of A t^2 + B t + C = 0; near-zero discriminant collapses to one."""
    if A == 0.0:
        return []
    p = B / A
    q = C / A
    disc = p * p - 4.0 * q
    if disc < -TANGENCY_EPS:
        return []
    if disc <= TANGENCY_EPS:
        roots = [-p / 2.0]
    else:
        s = math.sqrt(disc)
        roots = [(-p - s) / 2.0, (-p + s) / 2.0]
    return [t for t in roots if -PARAM_EPS <= t <= 1 + PARAM_EPS]


def _seg_circle(seg: Segment, c: CircleCurve) -> list[tuple[float, float]]:
    px, py = seg.p0
    dx, dy = seg.p1[0] - px, seg.p1[1] - py
    ox, oy = px - c.center[0], py - c.center[1]
    A = dx * dx + dy * dy
    B = 2.0 * (ox * dx + oy * dy)
    C = ox * ox + oy * oy - c.radius * c.radius
    return [(px + t * dx, py + t * dy) for t in _seg_quadratic_hits(seg.p0, (dx, dy), A, B, C)]


def _seg_ellipse(seg: Segment, e: EllipseCurve) -> list[tuple[float, float]]:
    # Map into the frame where the ellipse is the unit circle; the segment
    # parameter survives the affine map, so roots transfer directly.
    a, b = e.axes
    phi = math.radians(e.rotation)
    cp, sp = math.cos(phi), math.sin(phi)

    def to_unit(pt):
        dx, dy = pt[0] - e.center[0], pt[1] - e.center[1]
        return ((dx * cp + dy * sp) / a, (-dx * sp + dy * cp) / b)

    q0 = to_unit(seg.p0)
    q1 = to_unit(seg.p1)
    dx, dy = q1[0] - q0[0], q1[1] - q0[1]
    A = dx * dx + dy * dy
    B = 2.0 * (q0[0] * dx + q0[1] * dy)
    C = q0[0] * q0[0] + q0[1] * q0[1] - 1.0
    ts = _seg_quadratic_hits(q0, (dx, dy), A, B, C)
    sx, sy = seg.p0
    ex, ey = seg.p1
    return [(sx + t * (ex - sx), sy + t * (ey - sy)) for t in ts]


def _circle_circle(c1: CircleCurve, c2: CircleCurve) -> list[tuple[float, float]]:
    x1, y1 = c1.center
    x2, y2 = c2.center
    r1, r2 = c1.radius, c2.radius
    dx, dy = x2 - x1, y2 - y1
    d2 = dx * dx + dy * dy
    d = math.sqrt(d2)
    if d <= TANGENCY_EPS and abs(r1 - r2) <= TANGENCY_EPS:
        raise DegenerateIntersectionError("coincident circles")
    if d == 0.0:
        return []
    # Chord geometry: a = distance from c1 to the chord, h^2 = r1^2 - a^2.
    a = (d2 + r1 * r1 - r2 * r2) / (2.0 * d)
    h2 = r1 * r1 - a * a
    norm = max(r1 * r1, r2 * r2, 1e-30)
    if h2 < -TANGENCY_EPS * norm:
        return []
    mx = x1 + a * dx / d
    my = y1 + a * dy / d
    if h2 <= TANGENCY_EPS * norm:
        return [(mx, my)]
    h = math.sqrt(h2)
    ux, uy = -dy / d, dx / d
    return [(mx + h * ux, my + h * uy), (mx - h * ux, my - h * uy)]


# ---------------------------------------------------------------------------
# conic pairs: polyline candidates + Newton polish
# ---------------------------------------------------------------------------


def _as_ellipse(curve: CircleCurve | EllipseCurve) -> EllipseCurve:
    if isinstance(curve, CircleCurve):
        return EllipseCurve(curve.center, (curve.radius, curve.radius), 0.0)
    return curve


def _flatten_conic(e: EllipseCurve, tol: float = FLATTEN_TOL) -> np.ndarray:
    """Closed polyline (n+1, 2) whose chords deviate from the conic by <= tol."""
    a, b = e.axes
    # Sagitta bound with the smallest radius of curvature rho_min = b^2 / a.
    rho_min = min(a, b) ** 2 / max(a, b)
    chord = max(2.0 * math.sqrt(max(2.0 * tol * rho_min - tol * tol, 1e-12)), 0.5)
    perim = math.pi * (3 * (a + b) - math.sqrt((3 * a + b) * (a + 3 * b)))
    n = max(32, int(math.ceil(perim / chord)))
    t = np.linspace(0.0, 2.0 * math.pi, n + 1)
    phi = math.radians(e.rotation)
    cp, sp = math.cos(phi), math.sin(phi)
    ex = a * np.cos(t)
    ey = b * np.sin(t)
    return np.column_stack(
        (e.center[0] + ex * cp - ey * sp, e.center[1] + ex * sp + ey * cp)
    )


def _polyline_crossings(pa: np.ndarray, pb: np.ndarray) -> list[tuple[float, float]]:
    """All crossings between two closed polylines, vectorized over segment pairs."""
    a0 = pa[:-1]
    a1 = pa[1:]
    b0 = pb[:-1]
    b1 = pb[1:]
    da = a1 - a0
    db = b1 - b0
    # den[i, j] = cross(da_i, db_j)
    den = da[:, None, 0] * db[None, :, 1] - da[:, None, 1] * db[None, :, 0]
    w = b0[None, :, :] - a0[:, None, :]
    t_num = w[..., 0] * db[None, :, 1] - w[..., 1] * db[None, :, 0]
    u_num = w[..., 0] * da[:, None, 1] - w[..., 1] * da[:, None, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = t_num / den
        u = u_num / den
    hit = (np.abs(den) > 1e-12) & (t >= 0) & (t < 1) & (u >= 0) & (u < 1)
    ii, jj = np.nonzero(hit)
    pts = a0[ii] + t[ii, jj, None] * da[ii]
    return [(float(p[0]), float(p[1])) for p in pts]


def _newton_conic_pair(
    e1: EllipseCurve, e2: EllipseCurve, start: tuple[float, float]
) -> tuple[float, float] | None:
    x, y = start
    for _ in range(50):
        f1, f1x, f1y = _ellipse_implicit(e1, x, y)
        f2, f2x, f2y = _ellipse_implicit(e2, x, y)
        g1 = math.hypot(f1x, f1y)
        g2 = math.hypot(f2x, f2y)
        if g1 == 0.0 or g2 == 0.0:
            return None
        if abs(f1) / g1 <= 1e-10 and abs(f2) / g2 <= 1e-10:
            return (x, y)
        det = f1x * f2y - f1y * f2x
        if abs(det) <= 1e-14 * g1 * g2:
            return None  # tangential Jacobian; caller handles via dedup
        x -= (f1 * f2y - f2 * f1y) / det
        y -= (f2 * f1x - f1 * f2x) / det
    return None


def _conic_conic(
    c1: CircleCurve | EllipseCurve, c2: CircleCurve | EllipseCurve
) -> list[tuple[float, float]]:
    e1, e2 = _as_ellipse(c1), _as_ellipse(c2)
    same = (
        math.hypot(e1.center[0] - e2.center[0], e1.center[1] - e2.center[1]) <= TANGENCY_EPS
        and abs(e1.axes[0] - e2.axes[0]) <= TANGENCY_EPS
        and abs(e1.axes[1] - e2.axes[1]) <= TANGENCY_EPS
        and (
            abs(e1.axes[0] - e1.axes[1]) <= TANGENCY_EPS
            or abs((e1.rotation - e2.rotation) % 180.0) <= 1e-7
            or abs((e1.rotation - e2.rotation) % 180.0 - 180.0) <= 1e-7
        )
    )
    if same:
        raise DegenerateIntersectionError("coincident conics")
    candidates = _polyline_crossings(_flatten_conic(e1), _flatten_conic(e2))
    refined: list[tuple[float, float]] = []
    for cand in candidates:
        hit = _newton_conic_pair(e1, e2, cand)
        if hit is None:
            continue
        if all(math.hypot(hit[0] - q[0], hit[1] - q[1]) > 1e-6 for q in refined):
            refined.append(hit)
    return refined


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_RANK = {Segment: 0, CircleCurve: 1, EllipseCurve: 2}


def intersect_primitives(a: Curve, b: Curve) -> list[Intersection]:
    """Intersection points of two boundary curves with per-curve tangent directions.

    Raises DegenerateIntersectionError for coincident/overlapping inputs and
    ValueError for unsupported curve kinds.
    """
    for c in (a, b):
        if type(c) not in _RANK:
            raise ValueError(f"unsupported curve kind: {type(c).__name__}")
    if _RANK[type(a)] > _RANK[type(b)]:
        return [
            Intersection(i.point, i.dirs_b, i.dirs_a) for i in intersect_primitives(b, a)
        ]

    if isinstance(a, Segment) and isinstance(b, Segment):
        pts = _seg_seg(a, b)
    elif isinstance(a, Segment) and isinstance(b, CircleCurve):
        pts = _seg_circle(a, b)
    elif isinstance(a, Segment) and isinstance(b, EllipseCurve):
        pts = _seg_ellipse(a, b)
    elif isinstance(a, CircleCurve) and isinstance(b, CircleCurve):
        pts = _circle_circle(a, b)
    else:  # circle-ellipse or ellipse-ellipse
        pts = _conic_conic(a, b)

    return [
        Intersection((float(x), float(y)), _curve_dirs_at(a, (x, y)), _curve_dirs_at(b, (x, y)))
        for x, y in pts
    ]
