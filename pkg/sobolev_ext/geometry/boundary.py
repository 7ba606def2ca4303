"""
Closed parts D of a domain boundary: the Dirichlet part of a mixed problem,
and the set a localized extension must keep vanishing on.
"""
from typing import Any, Dict, Sequence, Union

import numpy as np

from ..errors import ConfigError
from .domains import BoxDomain, DomainOracle, PolygonDomain, _as_points, point_segment_distance


class BoundaryPart:
    kind: str = "abstract"

    def distance(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def samples(self, spacing: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_empty(self) -> bool:
        return False

    def covers(self, oracle: DomainOracle) -> bool:
        """True if D is the whole boundary."""
        return False

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind}


class NoBoundary(BoundaryPart):
    kind = "none"

    def __init__(self, n: int = 2):
        self.n = n

    def distance(self, x):
        return np.full(len(_as_points(x)), np.inf)

    def samples(self, spacing):
        return np.zeros((0, self.n))

    @property
    def is_empty(self):
        return True


class WholeBoundary(BoundaryPart):
    kind = "all"

    def __init__(self, oracle: DomainOracle):
        self.oracle = oracle

    def distance(self, x):
        return self.oracle.boundary_distance(x)

    def samples(self, spacing):
        return boundary_samples(self.oracle, spacing)

    def covers(self, oracle):
        return oracle is self.oracle


class SegmentPart(BoundaryPart):
    """A union of planar segments a_i -> b_i."""

    kind = "segments"

    def __init__(self, seg_a: Sequence[Sequence[float]], seg_b: Sequence[Sequence[float]]):
        self.seg_a = np.atleast_2d(np.asarray(seg_a, dtype=float))
        self.seg_b = np.atleast_2d(np.asarray(seg_b, dtype=float))
        if self.seg_a.shape != self.seg_b.shape or self.seg_a.shape[1] != 2:
            raise ConfigError("Segment endpoints must be matching lists of planar points",
                              {"key": "dirichlet"})

    def distance(self, x):
        return point_segment_distance(_as_points(x), self.seg_a, self.seg_b)

    def samples(self, spacing):
        return _subdivide(self.seg_a, self.seg_b, spacing)

    def describe(self):
        return {"kind": self.kind, "a": self.seg_a.tolist(), "b": self.seg_b.tolist()}


def _subdivide(seg_a: np.ndarray, seg_b: np.ndarray, spacing: float) -> np.ndarray:
    out = []
    for a, b in zip(seg_a, seg_b):
        count = max(1, int(np.ceil(np.linalg.norm(b - a) / spacing)))
        t = (np.arange(count) + 0.5) / count
        out.append(a + t[:, None] * (b - a))
    return np.concatenate(out) if out else np.zeros((0, 2))


def boundary_samples(oracle: DomainOracle, spacing: float) -> np.ndarray:
    """Points on the boundary, at most `spacing` apart along it."""
    if isinstance(oracle, PolygonDomain):
        return _subdivide(oracle.seg_a, oracle.seg_b, spacing)
    if isinstance(oracle, BoxDomain) and oracle.n == 2:
        lo, hi = oracle.bbox
        corners = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        return _subdivide(corners, np.roll(corners, -1, axis=0), spacing)
    # Lattice cells straddling the boundary, projected no further than spacing/2
    lower, upper = oracle.bbox
    lower = lower - spacing
    upper = upper + spacing
    axes = [np.arange(lo, hi + spacing / 2, spacing / 2) for lo, hi in zip(lower, upper)]
    mesh = np.stack([m.reshape(-1) for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    return mesh[oracle.boundary_distance(mesh) < spacing / 4]


def boundary_part_from_config(spec: Union[str, Dict[str, Any], None], oracle: DomainOracle) -> BoundaryPart:
    """"all", "none", "left"/"right"/"bottom"/"top" of the bounding box, or {segments: [[a, b], ...]}."""
    if spec is None or spec == "none":
        return NoBoundary(oracle.n)
    if spec == "all":
        return WholeBoundary(oracle)
    if isinstance(spec, str):
        lo, hi = oracle.bbox
        sides = {
            "left": ([lo[0], lo[1]], [lo[0], hi[1]]),
            "right": ([hi[0], lo[1]], [hi[0], hi[1]]),
            "bottom": ([lo[0], lo[1]], [hi[0], lo[1]]),
            "top": ([lo[0], hi[1]], [hi[0], hi[1]]),
        }
        names = spec.split("+")
        if oracle.n != 2 or any(name not in sides for name in names):
            raise ConfigError(f"Unknown boundary part {spec!r}", {"key": "dirichlet"})
        return SegmentPart([sides[s][0] for s in names], [sides[s][1] for s in names])
    if isinstance(spec, dict) and "segments" in spec:
        segments = np.asarray(spec["segments"], dtype=float)
        return SegmentPart(segments[:, 0], segments[:, 1])
    raise ConfigError(f"Cannot read boundary part {spec!r}", {"key": "dirichlet"})
