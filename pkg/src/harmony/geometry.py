"""Planar geometric primitives with exact signed clearance queries.

Shapes are immutable value objects: circles, axis-aligned boxes, convex
polygons, and capsules (thick segments, used for arm links).  The central
query is ``distance(a, b)``: positive clearance when the shapes are
disjoint, exactly 0 at touching contact, and negative when they overlap,
where the magnitude is a lower bound on the penetration depth (the signed
value is 1-Lipschitz under translation of either shape).  ``collides`` is
``distance <= 0``; contact counts as collision.

Scalar queries use plain floats (hot path for the planner's collision
checks); vectorized point-distance fields over numpy grids back the
workspace analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Circle",
    "Box",
    "Polygon",
    "Capsule",
    "Obstacle",
    "distance",
    "collides",
    "translate",
    "shape_within_box",
    "point_field",
]


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError("shape coordinates must be finite")


@dataclass(frozen=True)
class Circle:
    """Disc centered at (x, y).  radius == 0 degenerates to a point."""

    x: float
    y: float
    radius: float

    def __post_init__(self):
        _check_finite(self.x, self.y, self.radius)
        if self.radius < 0:
            raise ValueError("circle radius must be >= 0")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        _check_finite(self.xmin, self.ymin, self.xmax, self.ymax)
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("box min corner must be strictly below max corner")

    @cached_property
    def _poly(self) -> "Polygon":
        return Polygon(
            (
                (self.xmin, self.ymin),
                (self.xmax, self.ymin),
                (self.xmax, self.ymax),
                (self.xmin, self.ymax),
            )
        )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin


@dataclass(frozen=True)
class Polygon:
    """Convex polygon, vertices counter-clockwise, strictly convex corners."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        for x, y in verts:
            _check_finite(x, y)
        n = len(verts)
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cx, cy = verts[(i + 2) % n]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if cross <= 0.0:
                raise ValueError("polygon must be strictly convex and counter-clockwise")

    @cached_property
    def _edges(self) -> tuple[tuple[float, float, float, float, float, float], ...]:
        # per edge: (ax, ay, bx, by, nx, ny) with (nx, ny) the unit outward normal
        out = []
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            ex, ey = bx - ax, by - ay
            inv = 1.0 / math.hypot(ex, ey)
            out.append((ax, ay, bx, by, ey * inv, -ex * inv))
        return tuple(out)


@dataclass(frozen=True)
class Capsule:
    """Segment from a to b inflated by radius; models one arm link."""

    ax: float
    ay: float
    bx: float
    by: float
    radius: float

    def __post_init__(self):
        _check_finite(self.ax, self.ay, self.bx, self.by, self.radius)
        if self.radius < 0:
            raise ValueError("capsule radius must be >= 0")


Obstacle = Circle | Box | Polygon


def translate(shape, dx: float, dy: float):
    """Return the shape rigidly translated by (dx, dy)."""
    if isinstance(shape, Circle):
        return Circle(shape.x + dx, shape.y + dy, shape.radius)
    if isinstance(shape, Box):
        return Box(shape.xmin + dx, shape.ymin + dy, shape.xmax + dx, shape.ymax + dy)
    if isinstance(shape, Polygon):
        return Polygon(tuple((x + dx, y + dy) for x, y in shape.vertices))
    if isinstance(shape, Capsule):
        return Capsule(shape.ax + dx, shape.ay + dy, shape.bx + dx, shape.by + dy, shape.radius)
    raise TypeError(f"unsupported shape {type(shape).__name__}")


# ---------------------------------------------------------------------------
# scalar primitives


def _seg_point(ax, ay, bx, by, px, py) -> float:
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    vv = vx * vx + vy * vy
    if vv <= 0.0:
        return math.hypot(wx, wy)
    t = (wx * vx + wy * vy) / vv
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(wx - t * vx, wy - t * vy)


def _seg_seg(p1x, p1y, p2x, p2y, q1x, q1y, q2x, q2y) -> float:
    # 0 when the segments cross; otherwise min over endpoint-segment pairs
    d1x, d1y = p2x - p1x, p2y - p1y
    d2x, d2y = q2x - q1x, q2y - q1y
    # proper intersection test via orientations
    def orient(ox, oy, axx, ayy, bxx, byy):
        return (axx - ox) * (byy - oy) - (ayy - oy) * (bxx - ox)

    o1 = orient(p1x, p1y, p2x, p2y, q1x, q1y)
    o2 = orient(p1x, p1y, p2x, p2y, q2x, q2y)
    o3 = orient(q1x, q1y, q2x, q2y, p1x, p1y)
    o4 = orient(q1x, q1y, q2x, q2y, p2x, p2y)
    if ((o1 > 0) != (o2 > 0) and o1 != 0 and o2 != 0) and (
        (o3 > 0) != (o4 > 0) and o3 != 0 and o4 != 0
    ):
        return 0.0
    d = _seg_point(p1x, p1y, p2x, p2y, q1x, q1y)
    d = min(d, _seg_point(p1x, p1y, p2x, p2y, q2x, q2y))
    d = min(d, _seg_point(q1x, q1y, q2x, q2y, p1x, p1y))
    d = min(d, _seg_point(q1x, q1y, q2x, q2y, p2x, p2y))
    return d


def _point_poly_signed(px, py, poly: Polygon) -> float:
    """Signed distance point -> polygon boundary: negative inside."""
    max_slack = -math.inf
    for ax, ay, bx, by, nx, ny in poly._edges:
        s = nx * (px - ax) + ny * (py - ay)
        if s > max_slack:
            max_slack = s
    if max_slack <= 0.0:
        return max_slack
    best = math.inf
    for ax, ay, bx, by, nx, ny in poly._edges:
        d = _seg_point(ax, ay, bx, by, px, py)
        if d < best:
            best = d
    return best


def _seg_depth_in_poly(ax, ay, bx, by, poly: Polygon) -> float:
    """Max over segment points of depth inside the polygon.

    The per-edge slack h_i(t) is affine in the segment parameter, so the
    depth F(t) = min_i h_i(t) is concave piecewise-linear; its maximum is
    attained at t = 0, t = 1, or at a crossing of two of the affines.
    Negative result means no segment point lies inside.
    """
    cs = []
    gs = []
    for ex, ey, fx, fy, nx, ny in poly._edges:
        c = -(nx * (ax - ex) + ny * (ay - ey))
        g = -(nx * (bx - ax) + ny * (by - ay))
        cs.append(c)
        gs.append(g)
    m = len(cs)

    def depth_at(t):
        return min(cs[i] + t * gs[i] for i in range(m))

    best = max(depth_at(0.0), depth_at(1.0))
    for i in range(m):
        for j in range(i + 1, m):
            dg = gs[i] - gs[j]
            if dg == 0.0:
                continue
            t = (cs[j] - cs[i]) / dg
            if 0.0 < t < 1.0:
                d = depth_at(t)
                if d > best:
                    best = d
    return best


def _seg_poly_signed(ax, ay, bx, by, poly: Polygon) -> float:
    """Signed distance segment -> polygon: negative = max interior depth."""
    depth = _seg_depth_in_poly(ax, ay, bx, by, poly)
    if depth > 0.0:
        return -depth
    if depth == 0.0:
        return 0.0
    best = math.inf
    for ex, ey, fx, fy, nx, ny in poly._edges:
        d = _seg_seg(ax, ay, bx, by, ex, ey, fx, fy)
        if d < best:
            best = d
    return best


def _poly_poly_signed(pa: Polygon, pb: Polygon) -> float:
    # separating-axis gap over both polygons' edge normals (exact for convex)
    max_gap = -math.inf
    for first, second in ((pa, pb), (pb, pa)):
        for ax, ay, bx, by, nx, ny in first._edges:
            gap = min(nx * (qx - ax) + ny * (qy - ay) for qx, qy in second.vertices)
            if gap > max_gap:
                max_gap = gap
    if max_gap > 0.0:
        best = math.inf
        for ax, ay, bx, by, _, _ in pa._edges:
            for ex, ey, fx, fy, _, _ in pb._edges:
                d = _seg_seg(ax, ay, bx, by, ex, ey, fx, fy)
                if d < best:
                    best = d
        return best
    if max_gap == 0.0:
        return 0.0
    depth = 0.0
    for ax, ay, bx, by, _, _ in pa._edges:
        depth = max(depth, _seg_depth_in_poly(ax, ay, bx, by, pb))
    for ax, ay, bx, by, _, _ in pb._edges:
        depth = max(depth, _seg_depth_in_poly(ax, ay, bx, by, pa))
    return -depth


# ---------------------------------------------------------------------------
# pairwise dispatch

_RANK = {Circle: 0, Capsule: 1, Box: 2, Polygon: 3}


def _sort_key(shape) -> tuple:
    if isinstance(shape, Circle):
        return (shape.x, shape.y, shape.radius)
    if isinstance(shape, Capsule):
        return (shape.ax, shape.ay, shape.bx, shape.by, shape.radius)
    if isinstance(shape, Box):
        return (shape.xmin, shape.ymin, shape.xmax, shape.ymax)
    return shape.vertices


def distance(shape_a, shape_b) -> float:
    """Signed clearance between two shapes.

    Positive: exact minimum distance between the shapes.  Zero: touching
    contact.  Negative: overlapping, with |value| a lower bound on the
    penetration depth.  Exactly symmetric in its arguments.
    """
    ra, rb = _RANK[type(shape_a)], _RANK[type(shape_b)]
    if ra > rb or (ra == rb and _sort_key(shape_a) > _sort_key(shape_b)):
        shape_a, shape_b = shape_b, shape_a
        ra, rb = rb, ra

    a, b = shape_a, shape_b
    if isinstance(a, Circle):
        if isinstance(b, Circle):
            return math.hypot(b.x - a.x, b.y - a.y) - a.radius - b.radius
        if isinstance(b, Capsule):
            return _seg_point(b.ax, b.ay, b.bx, b.by, a.x, a.y) - a.radius - b.radius
        poly = b._poly if isinstance(b, Box) else b
        return _point_poly_signed(a.x, a.y, poly) - a.radius
    if isinstance(a, Capsule):
        if isinstance(b, Capsule):
            return (
                _seg_seg(a.ax, a.ay, a.bx, a.by, b.ax, b.ay, b.bx, b.by)
                - a.radius
                - b.radius
            )
        poly = b._poly if isinstance(b, Box) else b
        return _seg_poly_signed(a.ax, a.ay, a.bx, a.by, poly) - a.radius
    pa = a._poly if isinstance(a, Box) else a
    pb = b._poly if isinstance(b, Box) else b
    return _poly_poly_signed(pa, pb)


def collides(shape_a, shape_b) -> bool:
    """True iff the shapes touch or overlap (distance <= 0)."""
    return distance(shape_a, shape_b) <= 0.0


# ---------------------------------------------------------------------------
# boolean fast path (exactly equivalent to distance <= 0, skips the
# penetration-depth math and prefilters with bounding circles)


def _bounding_circle(shape) -> tuple[float, float, float]:
    if isinstance(shape, Circle):
        return shape.x, shape.y, shape.radius
    if isinstance(shape, Capsule):
        cx, cy = (shape.ax + shape.bx) / 2, (shape.ay + shape.by) / 2
        return cx, cy, math.hypot(shape.bx - cx, shape.by - cy) + shape.radius
    if isinstance(shape, Box):
        cx, cy = (shape.xmin + shape.xmax) / 2, (shape.ymin + shape.ymax) / 2
        return cx, cy, math.hypot(shape.xmax - cx, shape.ymax - cy)
    cx = sum(x for x, _ in shape.vertices) / len(shape.vertices)
    cy = sum(y for _, y in shape.vertices) / len(shape.vertices)
    return cx, cy, max(math.hypot(x - cx, y - cy) for x, y in shape.vertices)


def _seg_poly_collides(ax, ay, bx, by, r, poly: Polygon) -> bool:
    # endpoint inside?
    slack_a = max(nx * (ax - ex) + ny * (ay - ey) for ex, ey, _, _, nx, ny in poly._edges)
    if slack_a <= 0.0:
        return True
    slack_b = max(nx * (bx - ex) + ny * (by - ey) for ex, ey, _, _, nx, ny in poly._edges)
    if slack_b <= 0.0:
        return True
    for ex, ey, fx, fy, _, _ in poly._edges:
        if _seg_seg(ax, ay, bx, by, ex, ey, fx, fy) <= r:
            return True
    return False


def collides_fast(shape_a, shape_b) -> bool:
    """Boolean collision test, identical in outcome to ``collides``."""
    xa, ya, ra = _bounding_circle(shape_a)
    xb, yb, rb = _bounding_circle(shape_b)
    dx, dy = xb - xa, yb - ya
    reach = ra + rb
    if dx * dx + dy * dy > reach * reach:
        return False
    a, b = shape_a, shape_b
    if _RANK[type(a)] > _RANK[type(b)]:
        a, b = b, a
    if isinstance(a, Circle):
        if isinstance(b, Circle):
            return math.hypot(b.x - a.x, b.y - a.y) <= a.radius + b.radius
        if isinstance(b, Capsule):
            return _seg_point(b.ax, b.ay, b.bx, b.by, a.x, a.y) <= a.radius + b.radius
        poly = b._poly if isinstance(b, Box) else b
        return _point_poly_signed(a.x, a.y, poly) <= a.radius
    if isinstance(a, Capsule):
        if isinstance(b, Capsule):
            return (
                _seg_seg(a.ax, a.ay, a.bx, a.by, b.ax, b.ay, b.bx, b.by)
                <= a.radius + b.radius
            )
        poly = b._poly if isinstance(b, Box) else b
        return _seg_poly_collides(a.ax, a.ay, a.bx, a.by, a.radius, poly)
    return distance(a, b) <= 0.0


def shape_within_box(shape, box: Box) -> bool:
    """True iff the shape lies entirely inside the (closed) box."""
    if isinstance(shape, Circle):
        return (
            shape.x - shape.radius >= box.xmin
            and shape.x + shape.radius <= box.xmax
            and shape.y - shape.radius >= box.ymin
            and shape.y + shape.radius <= box.ymax
        )
    if isinstance(shape, Capsule):
        r = shape.radius
        return (
            min(shape.ax, shape.bx) - r >= box.xmin
            and max(shape.ax, shape.bx) + r <= box.xmax
            and min(shape.ay, shape.by) - r >= box.ymin
            and max(shape.ay, shape.by) + r <= box.ymax
        )
    if isinstance(shape, Box):
        return (
            shape.xmin >= box.xmin
            and shape.xmax <= box.xmax
            and shape.ymin >= box.ymin
            and shape.ymax <= box.ymax
        )
    if isinstance(shape, Polygon):
        return all(
            box.xmin <= x <= box.xmax and box.ymin <= y <= box.ymax
            for x, y in shape.vertices
        )
    raise TypeError(f"unsupported shape {type(shape).__name__}")


# ---------------------------------------------------------------------------
# vectorized point fields (workspace analysis)


def point_field(shape, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Signed distance from each point to the shape (negative inside)."""
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    if isinstance(shape, Circle):
        return np.hypot(px - shape.x, py - shape.y) - shape.radius
    if isinstance(shape, Box):
        dx = np.maximum(shape.xmin - px, px - shape.xmax)
        dy = np.maximum(shape.ymin - py, py - shape.ymax)
        outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
        inside = np.minimum(np.maximum(dx, dy), 0.0)
        return outside + inside
    if isinstance(shape, Capsule):
        return _seg_point_field(shape.ax, shape.ay, shape.bx, shape.by, px, py) - shape.radius
    if isinstance(shape, Polygon):
        slack = np.full(px.shape, -np.inf)
        for ax, ay, bx, by, nx, ny in shape._edges:
            slack = np.maximum(slack, nx * (px - ax) + ny * (py - ay))
        boundary = np.full(px.shape, np.inf)
        for ax, ay, bx, by, nx, ny in shape._edges:
            boundary = np.minimum(boundary, _seg_point_field(ax, ay, bx, by, px, py))
        return np.where(slack <= 0.0, slack, boundary)
    raise TypeError(f"unsupported shape {type(shape).__name__}")


def _seg_point_field(ax, ay, bx, by, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    vx, vy = bx - ax, by - ay
    vv = vx * vx + vy * vy
    if vv <= 0.0:
        return np.hypot(px - ax, py - ay)
    t = np.clip(((px - ax) * vx + (py - ay) * vy) / vv, 0.0, 1.0)
    return np.hypot(px - ax - t * vx, py - ay - t * vy)


# ---------------------------------------------------------------------------
# vectorized segment (capsule) collision predicates


def _point_seg_batch(px, py, ax, ay, bx, by):
    """Distance from fixed point (px, py) to each segment (arrays)."""
    vx, vy = bx - ax, by - ay
    vv = vx * vx + vy * vy
    t = np.where(vv > 0.0, ((px - ax) * vx + (py - ay) * vy) / np.where(vv > 0, vv, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(px - ax - t * vx, py - ay - t * vy)


def _segs_cross_fixed(ax, ay, bx, by, ex, ey, fx, fy):
    """Proper-crossing test of segment arrays against one fixed segment."""
    o1 = (bx - ax) * (ey - ay) - (by - ay) * (ex - ax)
    o2 = (bx - ax) * (fy - ay) - (by - ay) * (fx - ax)
    o3 = (fx - ex) * (ay - ey) - (fy - ey) * (ax - ex)
    o4 = (fx - ex) * (by - ey) - (fy - ey) * (bx - ex)
    return (
        ((o1 > 0) != (o2 > 0)) & (o1 != 0) & (o2 != 0)
        & ((o3 > 0) != (o4 > 0)) & (o3 != 0) & (o4 != 0)
    )


def _seg_fixedseg_dist(ax, ay, bx, by, ex, ey, fx, fy):
    """Distance from segment arrays to one fixed segment (0 when crossing)."""
    d = _point_seg_batch(ex, ey, ax, ay, bx, by)
    d = np.minimum(d, _point_seg_batch(fx, fy, ax, ay, bx, by))
    d = np.minimum(d, _endpoint_to_fixed(ax, ay, ex, ey, fx, fy))
    d = np.minimum(d, _endpoint_to_fixed(bx, by, ex, ey, fx, fy))
    cross = _segs_cross_fixed(ax, ay, bx, by, ex, ey, fx, fy)
    return np.where(cross, 0.0, d)


def _endpoint_to_fixed(px, py, ex, ey, fx, fy):
    """Distance from point arrays to one fixed segment."""
    vx, vy = fx - ex, fy - ey
    vv = vx * vx + vy * vy
    if vv <= 0.0:
        return np.hypot(px - ex, py - ey)
    t = np.clip(((px - ex) * vx + (py - ey) * vy) / vv, 0.0, 1.0)
    return np.hypot(px - ex - t * vx, py - ey - t * vy)


def segments_collide(shape, ax, ay, bx, by, radius: float) -> np.ndarray:
    """True per segment iff the capsule (segment + radius) touches the shape."""
    ax = np.asarray(ax, dtype=float)
    ay = np.asarray(ay, dtype=float)
    bx = np.asarray(bx, dtype=float)
    by = np.asarray(by, dtype=float)
    if isinstance(shape, Circle):
        d = _point_seg_batch(shape.x, shape.y, ax, ay, bx, by)
        return d <= shape.radius + radius
    poly = shape._poly if isinstance(shape, Box) else shape
    if isinstance(poly, Polygon):
        # inside test for either endpoint, else crossing, else edge distance
        hit = np.zeros(ax.shape, dtype=bool)
        slack_a = np.full(ax.shape, -np.inf)
        slack_b = np.full(ax.shape, -np.inf)
        for ex, ey, fx, fy, nx, ny in poly._edges:
            slack_a = np.maximum(slack_a, nx * (ax - ex) + ny * (ay - ey))
            slack_b = np.maximum(slack_b, nx * (bx - ex) + ny * (by - ey))
        hit |= (slack_a <= 0.0) | (slack_b <= 0.0)
        for ex, ey, fx, fy, nx, ny in poly._edges:
            hit |= _seg_fixedseg_dist(ax, ay, bx, by, ex, ey, fx, fy) <= radius
        return hit
    raise TypeError(f"unsupported shape {type(shape).__name__}")
