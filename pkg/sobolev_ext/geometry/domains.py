import logging
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from ..errors import ConfigError

logger = logging.getLogger(__name__)

# Pairs per chunk in vectorised point/box against segment kernels
CHUNK = 1 << 21


class DomainOracle:
    """
    Membership plus boundary distance of an open set. Subclasses give the exact
    distance from points and from closed boxes to the boundary.
    """

    kind: str = "abstract"

    def __init__(self, n: int, lower: Sequence[float], upper: Sequence[float],
                 rad: Union[float, None] = None, params: Union[Dict[str, Any], None] = None):
        self.n = n
        self.bbox_lower = np.asarray(lower, dtype=float)
        self.bbox_upper = np.asarray(upper, dtype=float)
        self.rad = rad
        self.params = params or {}

    def __repr__(self):
        return f"{self.__class__.__name__}(kind={self.kind!r}, params={self.params})"

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, **self.params}

    def contains(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def boundary_distance(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def box_distance(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        """Distance from each closed box to the boundary; 0 if the box meets it."""
        centers = (lower + upper) / 2
        half_diag = np.linalg.norm(upper - lower, axis=1) / 2
        return np.maximum(self.boundary_distance(centers) - half_diag, 0.0)

    def box_inside(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        lower = np.atleast_2d(lower)
        upper = np.atleast_2d(upper)
        centers = (lower + upper) / 2
        return self.contains(centers) & (self.box_distance(lower, upper) > 0)

    def box_in_closure(self, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
        """Closed box inside the closure of the domain (staircase cells)."""
        lower = np.atleast_2d(lower)
        upper = np.atleast_2d(upper)
        shrink = 1e-9 * np.max(upper - lower, axis=1, keepdims=True)
        return self.box_inside(lower + shrink, upper - shrink)

    @property
    def bbox(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.bbox_lower, self.bbox_upper


def _as_points(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float))


# Segment kernels (2-D)

def point_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min distance from each point to a family of segments a->b."""
    points = _as_points(points)
    out = np.full(len(points), np.inf)
    if len(a) == 0:
        return out
    d = b - a
    dd = np.maximum(np.einsum('ij,ij->i', d, d), 1e-300)
    step = max(1, CHUNK // len(a))
    for start in range(0, len(points), step):
        p = points[start:start + step]
        rel = p[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum('mej,ej->me', rel, d) / dd[None, :], 0.0, 1.0)
        diff = rel - t[:, :, None] * d[None, :, :]
        out[start:start + step] = np.sqrt(np.min(np.einsum('mej,mej->me', diff, diff), axis=1))
    return out


def _segments_hit_boxes(lower, upper, a, b) -> np.ndarray:
    """Liang-Barsky clip, returns (m, E) True where segment meets the closed box."""
    d = b - a
    t0 = np.zeros((len(lower), len(a)))
    t1 = np.ones((len(lower), len(a)))
    hit = np.ones((len(lower), len(a)), dtype=bool)
    with np.errstate(divide='ignore', invalid='ignore'):
        for axis in range(2):
            da = d[None, :, axis]
            for p, q in ((-da, a[None, :, axis] - lower[:, None, axis]),
                         (da, upper[:, None, axis] - a[None, :, axis])):
                parallel = p == 0
                hit &= ~(parallel & (q < 0))
                r = q / p
                t0 = np.where(~parallel & (p < 0), np.maximum(t0, r), t0)
                t1 = np.where(~parallel & (p > 0), np.minimum(t1, r), t1)
    return hit & (t0 <= t1)


def _point_box_distance(points: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    gap = np.maximum(0.0, np.maximum(lower - points, points - upper))
    return np.sqrt(np.sum(gap ** 2, axis=-1))


def box_segment_distance(lower: np.ndarray, upper: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact distance between each closed box and the union of segments."""
    lower = np.atleast_2d(lower)
    upper = np.atleast_2d(upper)
    out = np.full(len(lower), np.inf)
    if len(a) == 0:
        return out
    step = max(1, CHUNK // (4 * len(a)))
    for start in range(0, len(lower), step):
        lo = lower[start:start + step]
        hi = upper[start:start + step]
        hit = _segments_hit_boxes(lo, hi, a, b)
        da = _point_box_distance(a[None, :, :], lo[:, None, :], hi[:, None, :])
        db = _point_box_distance(b[None, :, :], lo[:, None, :], hi[:, None, :])
        best = np.minimum(da, db)
        for cx, cy in ((lo[:, 0], lo[:, 1]), (lo[:, 0], hi[:, 1]),
                       (hi[:, 0], lo[:, 1]), (hi[:, 0], hi[:, 1])):
            corner = np.stack([cx, cy], axis=1)
            d = b - a
            dd = np.maximum(np.einsum('ij,ij->i', d, d), 1e-300)
            rel = corner[:, None, :] - a[None, :, :]
            t = np.clip(np.einsum('mej,ej->me', rel, d) / dd[None, :], 0.0, 1.0)
            diff = rel - t[:, :, None] * d[None, :, :]
            best = np.minimum(best, np.sqrt(np.einsum('mej,mej->me', diff, diff)))
        best[hit] = 0.0
        out[start:start + step] = np.min(best, axis=1)
    return out


def even_odd_contains(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    points = _as_points(points)
    inside = np.zeros(len(points), dtype=bool)
    step = max(1, CHUNK // max(1, len(a)))
    for start in range(0, len(points), step):
        p = points[start:start + step]
        x = p[:, 0:1]
        y = p[:, 1:2]
        ay, by = a[None, :, 1], b[None, :, 1]
        ax, bx = a[None, :, 0], b[None, :, 0]
        straddle = (ay > y) != (by > y)
        with np.errstate(divide='ignore', invalid='ignore'):
            x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
        crossings = np.sum(straddle & (x < x_cross), axis=1)
        inside[start:start + step] = (crossings % 2) == 1
    return inside


# Rational kernels; float vertices convert to Fraction exactly

Point = Tuple[Fraction, Fraction]


def _exact_point_segment_sq(p: Point, a: Point, b: Point) -> Fraction:
    d = (b[0] - a[0], b[1] - a[1])
    rel = (p[0] - a[0], p[1] - a[1])
    dd = d[0] * d[0] + d[1] * d[1]
    t = Fraction(0)
    if dd != 0:
        t = min(Fraction(1), max(Fraction(0), (rel[0] * d[0] + rel[1] * d[1]) / dd))
    ex, ey = rel[0] - t * d[0], rel[1] - t * d[1]
    return ex * ex + ey * ey


def _exact_point_box_sq(p: Point, lower: Point, upper: Point) -> Fraction:
    total = Fraction(0)
    for x, lo, hi in zip(p, lower, upper):
        gap = max(Fraction(0), lo - x, x - hi)
        total += gap * gap
    return total


def _exact_segment_hits_box(a: Point, b: Point, lower: Point, upper: Point) -> bool:
    t0, t1 = Fraction(0), Fraction(1)
    for axis in range(2):
        d = b[axis] - a[axis]
        for p, q in ((-d, a[axis] - lower[axis]), (d, upper[axis] - a[axis])):
            if p == 0:
                if q < 0:
                    return False
                continue
            r = q / p
            if p < 0:
                t0 = max(t0, r)
            else:
                t1 = min(t1, r)
    return t0 <= t1


def exact_box_segment_sq(lower: Point, upper: Point, a: Point, b: Point) -> Fraction:
    """Squared distance between a closed box and a segment, in rationals."""
    if _exact_segment_hits_box(a, b, lower, upper):
        return Fraction(0)
    best = min(_exact_point_box_sq(a, lower, upper), _exact_point_box_sq(b, lower, upper))
    for corner in ((lower[0], lower[1]), (lower[0], upper[1]),
                   (upper[0], lower[1]), (upper[0], upper[1])):
        best = min(best, _exact_point_segment_sq(corner, a, b))
    return best


class PolygonDomain(DomainOracle):
    """
    Open set bounded by one or more closed polygonal rings, even-odd rule.
    Covers squares, the L-shape, Koch prefractals, cusps and disjoint unions.
    """

    kind = "polygon"

    def __init__(self, rings: Sequence[np.ndarray], kind: str = "polygon",
                 rad: Union[float, None] = None, params: Union[Dict[str, Any], None] = None):
        rings = [np.asarray(r, dtype=float) for r in rings]
        if not rings or any(len(r) < 3 for r in rings):
            raise ConfigError("A polygon ring needs at least 3 vertices")
        allv = np.concatenate(rings)
        super().__init__(2, allv.min(axis=0), allv.max(axis=0), rad=rad, params=params)
        self.kind = kind
        self.rings = rings
        self.seg_a = np.concatenate(rings)
        self.seg_b = np.concatenate([np.roll(r, -1, axis=0) for r in rings])

    @property
    def edge_count(self) -> int:
        return len(self.seg_a)

    def contains(self, x):
        x = _as_points(x)
        return even_odd_contains(x, self.seg_a, self.seg_b) & (self.boundary_distance(x) > 0)

    def boundary_distance(self, x):
        return point_segment_distance(_as_points(x), self.seg_a, self.seg_b)

    def box_distance(self, lower, upper):
        return box_segment_distance(lower, upper, self.seg_a, self.seg_b)

    def exact_box_distance_sq(self, lower: Sequence[Fraction], upper: Sequence[Fraction]) -> Fraction:
        """
        Squared distance from the closed box to the boundary in exact rational
        arithmetic. Edges are screened in floats first: only those whose
        distance to the box center is within the half diagonal of the
        smallest one can realise the minimum.
        """
        lower = tuple(Fraction(v) for v in lower)
        upper = tuple(Fraction(v) for v in upper)
        center = np.array([[float((lo + hi) / 2) for lo, hi in zip(lower, upper)]])
        half_diagonal = float(np.hypot(*[float(hi - lo) for lo, hi in zip(lower, upper)])) / 2

        d = self.seg_b - self.seg_a
        dd = np.maximum(np.einsum('ij,ij->i', d, d), 1e-300)
        rel = center - self.seg_a
        t = np.clip(np.einsum('ij,ij->i', rel, d) / dd, 0.0, 1.0)
        to_center = np.linalg.norm(rel - t[:, None] * d, axis=1)
        slack = half_diagonal + 1e-9 * (1.0 + float(np.max(np.abs(center))))
        candidates = np.flatnonzero(to_center <= to_center.min() + slack)

        return min(
            exact_box_segment_sq(lower, upper,
                                 (Fraction(self.seg_a[e, 0]), Fraction(self.seg_a[e, 1])),
                                 (Fraction(self.seg_b[e, 0]), Fraction(self.seg_b[e, 1])))
            for e in candidates)


class SegmentComplementDomain(DomainOracle):
    """R^2 minus a closed polyline set D; the open set decomposed for Whitney extensions from D."""

    kind = "segment-complement"

    def __init__(self, seg_a: np.ndarray, seg_b: np.ndarray, lower, upper,
                 params: Union[Dict[str, Any], None] = None):
        super().__init__(2, lower, upper, params=params)
        self.seg_a = np.asarray(seg_a, dtype=float)
        self.seg_b = np.asarray(seg_b, dtype=float)

    def contains(self, x):
        return self.boundary_distance(x) > 0

    def boundary_distance(self, x):
        return point_segment_distance(_as_points(x), self.seg_a, self.seg_b)

    def box_distance(self, lower, upper):
        return box_segment_distance(lower, upper, self.seg_a, self.seg_b)


class BoxDomain(DomainOracle):
    kind = "box"

    def __init__(self, lower: Sequence[float], upper: Sequence[float], kind: str = "box"):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if np.any(upper <= lower):
            raise ConfigError(f"Degenerate box {lower.tolist()} .. {upper.tolist()}")
        super().__init__(len(lower), lower, upper,
                         rad=float(np.linalg.norm(upper - lower) / 2),
                         params={"lower": lower.tolist(), "upper": upper.tolist()})
        self.kind = kind

    def contains(self, x):
        x = _as_points(x)
        return np.all((x > self.bbox_lower) & (x < self.bbox_upper), axis=1)

    def boundary_distance(self, x):
        x = _as_points(x)
        inside = self.contains(x)
        gaps = np.minimum(x - self.bbox_lower, self.bbox_upper - x)
        d_in = np.min(gaps, axis=1)
        d_out = _point_box_distance(x, self.bbox_lower, self.bbox_upper)
        return np.where(inside, d_in, d_out)

    def box_distance(self, lower, upper):
        lower = np.atleast_2d(lower)
        upper = np.atleast_2d(upper)
        inner = np.all((lower > self.bbox_lower) & (upper < self.bbox_upper), axis=1)
        d_in = np.min(np.minimum(lower - self.bbox_lower, self.bbox_upper - upper), axis=1)
        gap = np.maximum(0.0, np.maximum(self.bbox_lower - upper, lower - self.bbox_upper))
        d_out = np.sqrt(np.sum(gap ** 2, axis=1))
        return np.where(inner, d_in, d_out)


class BallDomain(DomainOracle):
    kind = "ball"

    def __init__(self, center: Sequence[float], radius: float):
        center = np.asarray(center, dtype=float)
        super().__init__(len(center), center - radius, center + radius, rad=float(radius),
                         params={"center": center.tolist(), "radius": float(radius)})
        self.center = center
        self.radius = float(radius)

    def contains(self, x):
        return np.linalg.norm(_as_points(x) - self.center, axis=1) < self.radius

    def boundary_distance(self, x):
        return np.abs(self.radius - np.linalg.norm(_as_points(x) - self.center, axis=1))

    def box_distance(self, lower, upper):
        lower = np.atleast_2d(lower)
        upper = np.atleast_2d(upper)
        near = _point_box_distance(self.center[None, :], lower, upper)
        far = np.linalg.norm(np.maximum(np.abs(lower - self.center), np.abs(upper - self.center)), axis=1)
        return np.where(far < self.radius, self.radius - far,
                        np.where(near > self.radius, near - self.radius, 0.0))


class SlabDomain(DomainOracle):
    """{lo < x_axis < hi}, unbounded in the other directions."""

    kind = "strip"

    def __init__(self, n: int, axis: int, lo: float, hi: float):
        lower = np.full(n, -np.inf)
        upper = np.full(n, np.inf)
        lower[axis], upper[axis] = lo, hi
        super().__init__(n, lower, upper, rad=None,
                         params={"axis": axis, "lo": lo, "hi": hi})
        self.axis, self.lo, self.hi = axis, float(lo), float(hi)

    def contains(self, x):
        t = _as_points(x)[:, self.axis]
        return (t > self.lo) & (t < self.hi)

    def boundary_distance(self, x):
        t = _as_points(x)[:, self.axis]
        return np.minimum(np.abs(t - self.lo), np.abs(t - self.hi))

    def box_distance(self, lower, upper):
        lo = np.atleast_2d(lower)[:, self.axis]
        hi = np.atleast_2d(upper)[:, self.axis]
        inner = (lo > self.lo) & (hi < self.hi)
        d_in = np.minimum(lo - self.lo, self.hi - hi)
        # Outside boxes, or boxes meeting a boundary line (gap 0)
        d_out = np.maximum(0.0, np.maximum(self.lo - hi, lo - self.hi))
        crosses = ((lo <= self.lo) & (hi >= self.lo)) | ((lo <= self.hi) & (hi >= self.hi))
        return np.where(inner, d_in, np.where(crosses, 0.0, d_out))


class ComplementDomain(DomainOracle):
    """Interior of the complement, (base^c)°; the boundary is shared with the base."""

    kind = "complement"

    def __init__(self, base: DomainOracle, lower=None, upper=None):
        lower = base.bbox_lower if lower is None else lower
        upper = base.bbox_upper if upper is None else upper
        super().__init__(base.n, lower, upper, params={"of": base.describe()})
        self.base = base

    def contains(self, x):
        x = _as_points(x)
        return ~self.base.contains(x) & (self.base.boundary_distance(x) > 0)

    def boundary_distance(self, x):
        return self.base.boundary_distance(x)

    def box_distance(self, lower, upper):
        return self.base.box_distance(lower, upper)


class UnionDomain(DomainOracle):
    """Union of parts with pairwise disjoint closures; distances are then exact."""

    kind = "union"

    def __init__(self, parts: Sequence[DomainOracle]):
        if not parts:
            raise ConfigError("A union needs at least one part")
        n = parts[0].n
        lower = np.min([p.bbox_lower for p in parts], axis=0)
        upper = np.max([p.bbox_upper for p in parts], axis=0)
        super().__init__(n, lower, upper, params={"parts": [p.describe() for p in parts]})
        self.parts = list(parts)

    def contains(self, x):
        x = _as_points(x)
        return np.any([p.contains(x) for p in self.parts], axis=0)

    def boundary_distance(self, x):
        x = _as_points(x)
        return np.min([p.boundary_distance(x) for p in self.parts], axis=0)

    def box_distance(self, lower, upper):
        return np.min([p.box_distance(lower, upper) for p in self.parts], axis=0)


class EmptySet(DomainOracle):
    kind = "empty"

    def __init__(self, n: int = 2):
        super().__init__(n, np.zeros(n), np.zeros(n))

    def contains(self, x):
        return np.zeros(len(_as_points(x)), dtype=bool)

    def boundary_distance(self, x):
        return np.full(len(_as_points(x)), np.inf)

    def box_distance(self, lower, upper):
        return np.full(len(np.atleast_2d(lower)), np.inf)


# Generators

def rectangle(lower=(0.0, 0.0), upper=(1.0, 1.0)) -> PolygonDomain:
    (x0, y0), (x1, y1) = lower, upper
    ring = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)
    return PolygonDomain([ring], kind="rectangle",
                         rad=float(np.hypot(x1 - x0, y1 - y0) / 2),
                         params={"lower": list(lower), "upper": list(upper)})


def unit_square() -> PolygonDomain:
    return rectangle((0.0, 0.0), (1.0, 1.0))


def lshape() -> PolygonDomain:
    """[0,1]^2 minus the closed upper-right quarter [1/2,1]^2."""
    ring = np.array([[0, 0], [1, 0], [1, 0.5], [0.5, 0.5], [0.5, 1], [0, 1]], dtype=float)
    return PolygonDomain([ring], kind="L-shape")


def cusp(a: float, vertices: int = 512) -> PolygonDomain:
    """
    {0 < x2 < x1^a, 0 < x1 < 1}; the curved side is sampled at `vertices` points.
    Below x1 = 1/vertices the tip is a single chord, so cubes finer than about
    1/vertices see a wedge there. Keep 2^j_max <= vertices for a cusp at every level.
    """
    if a <= 1:
        raise ConfigError(f"Cusp exponent must be > 1, got {a}")
    t = np.linspace(0.0, 1.0, vertices + 1)[1:]
    curve = np.stack([t[::-1], t[::-1] ** a], axis=1)
    ring = np.concatenate([[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], curve[1:]])
    return PolygonDomain([ring], kind="cusp", params={"a": a, "vertices": vertices})


def disjoint_squares(gap: float = 0.5) -> UnionDomain:
    return UnionDomain([rectangle((0.0, 0.0), (1.0, 1.0)),
                        rectangle((1.0 + gap, 0.0), (2.0 + gap, 1.0))])


def polygonal_disc(radius: float = 1.0, vertices: int = 256) -> PolygonDomain:
    angles = np.linspace(0.0, 2 * np.pi, vertices, endpoint=False)
    ring = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return PolygonDomain([ring], kind="disc", rad=float(radius),
                         params={"radius": radius, "vertices": vertices})
