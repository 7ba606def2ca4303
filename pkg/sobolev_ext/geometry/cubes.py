"""
Exact dyadic cubes.

A cube is addressed by an integer level and an integer index tuple relative
to a root box. All geometry is kept in `Fraction` so children, centers and
dilates are exact binary rationals; float views are provided for numerics.
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence, Tuple

import numpy as np


def as_fraction(value) -> Fraction:
    # Floats are binary rationals, so the conversion is exact
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (np.integer, np.floating)):
        value = value.item()
    return Fraction(value)


@dataclass(frozen=True)
class RootBox:
    origin: Tuple[Fraction, ...]
    side: Fraction

    @classmethod
    def make(cls, origin: Sequence[float], side: float) -> "RootBox":
        return cls(tuple(as_fraction(o) for o in origin), as_fraction(side))

    @property
    def n(self) -> int:
        return len(self.origin)

    @property
    def lower(self) -> np.ndarray:
        return np.array([float(o) for o in self.origin])

    @property
    def upper(self) -> np.ndarray:
        return self.lower + float(self.side)

    def root_cube(self) -> "DyadicCube":
        return DyadicCube(0, (0,) * self.n, self)


@dataclass(frozen=True, order=False)
class DyadicCube:
    level: int
    index: Tuple[int, ...]
    root: RootBox

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"Cube level must be nonnegative, got {self.level}")
        if len(self.index) != self.root.n:
            raise ValueError(
                f"Cube index {self.index} does not match dimension {self.root.n}")

    def __repr__(self):
        return f"DyadicCube(level={self.level}, index={self.index})"

    @property
    def n(self) -> int:
        return self.root.n

    @property
    def key(self) -> Tuple[int, Tuple[int, ...]]:
        # Lexicographic (level, index) tie-break order
        return (self.level, self.index)

    @property
    def side(self) -> Fraction:
        return self.root.side / (1 << self.level)

    @property
    def corner(self) -> Tuple[Fraction, ...]:
        s = self.side
        return tuple(o + i * s for o, i in zip(self.root.origin, self.index))

    @property
    def center(self) -> Tuple[Fraction, ...]:
        half = self.side / 2
        return tuple(c + half for c in self.corner)

    @property
    def side_f(self) -> float:
        return float(self.side)

    @property
    def lower_f(self) -> np.ndarray:
        return np.array([float(c) for c in self.corner])

    @property
    def upper_f(self) -> np.ndarray:
        return self.lower_f + self.side_f

    @property
    def center_f(self) -> np.ndarray:
        return np.array([float(c) for c in self.center])

    @property
    def diameter(self) -> float:
        return float(np.sqrt(self.n)) * self.side_f

    def dilate(self, factor) -> Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]:
        """Closed box bounds of the concentric dilate factor*Q."""
        factor = as_fraction(factor)
        half = self.side * factor / 2
        center = self.center
        return tuple(c - half for c in center), tuple(c + half for c in center)

    def children(self) -> Iterator["DyadicCube"]:
        for offset in product((0, 1), repeat=self.n):
            yield DyadicCube(
                self.level + 1,
                tuple(2 * i + o for i, o in zip(self.index, offset)),
                self.root)

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("The root cube has no parent")
        return DyadicCube(self.level - 1, tuple(i >> 1 for i in self.index), self.root)

    def fine_span(self, level: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """Integer [lo, hi) extent of the cube in units of the given finer level."""
        if level < self.level:
            raise ValueError("Span level must not be coarser than the cube")
        scale = 1 << (level - self.level)
        lo = tuple(i * scale for i in self.index)
        return lo, tuple(l + scale for l in lo)

    def touches(self, other: "DyadicCube") -> bool:
        """Closed cubes intersect but interiors are disjoint."""
        level = max(self.level, other.level)
        lo_a, hi_a = self.fine_span(level)
        lo_b, hi_b = other.fine_span(level)
        closed = all(la <= hb and lb <= ha for la, ha, lb, hb in zip(lo_a, hi_a, lo_b, hi_b))
        open_overlap = all(la < hb and lb < ha for la, ha, lb, hb in zip(lo_a, hi_a, lo_b, hi_b))
        return closed and not open_overlap

    def interiors_overlap(self, other: "DyadicCube") -> bool:
        level = max(self.level, other.level)
        lo_a, hi_a = self.fine_span(level)
        lo_b, hi_b = other.fine_span(level)
        return all(la < hb and lb < ha for la, ha, lb, hb in zip(lo_a, hi_a, lo_b, hi_b))

    def contains_point(self, x: Sequence[float], dilation: float = 1.0) -> bool:
        lower, upper = self.dilate(dilation)
        return all(float(lo) <= xi <= float(hi) for lo, hi, xi in zip(lower, upper, x))


def box_distance(lower_a: np.ndarray, upper_a: np.ndarray,
                 lower_b: np.ndarray, upper_b: np.ndarray) -> float:
    """Euclidean distance between two closed axis-aligned boxes."""
    gap = np.maximum(0.0, np.maximum(lower_a - upper_b, lower_b - upper_a))
    return float(np.sqrt(np.sum(gap ** 2)))


def cube_distance(a: DyadicCube, b: DyadicCube) -> float:
    return box_distance(a.lower_f, a.upper_f, b.lower_f, b.upper_f)


def cube_arrays(cubes: Sequence[DyadicCube]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(lower corners, upper corners, sides) as float arrays."""
    if len(cubes) == 0:
        return np.zeros((0, 0)), np.zeros((0, 0)), np.zeros(0)
    lower = np.array([c.lower_f for c in cubes])
    sides = np.array([c.side_f for c in cubes])
    return lower, lower + sides[:, None], sides
