import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from ..errors import EmptyDomain, OracleInconsistent
from .cubes import DyadicCube, RootBox
from .domains import DomainOracle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WhitneyCover:
    cubes: Tuple[DyadicCube, ...]
    truncated: np.ndarray
    distances: np.ndarray
    adjacency: sparse.csr_matrix
    oracle: DomainOracle
    root: RootBox
    j_max: int
    _arrays: Dict[str, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def __len__(self):
        return len(self.cubes)

    @property
    def n(self) -> int:
        return self.root.n

    def _cached(self, name: str, build):
        if name not in self._arrays:
            self._arrays[name] = build()
        return self._arrays[name]

    @property
    def levels(self) -> np.ndarray:
        return self._cached("levels", lambda: np.array([c.level for c in self.cubes], dtype=int))

    @property
    def indices(self) -> np.ndarray:
        return self._cached("indices", lambda: np.array([c.index for c in self.cubes], dtype=np.int64)
                            .reshape(len(self.cubes), self.n))

    @property
    def sides(self) -> np.ndarray:
        return self._cached("sides", lambda: float(self.root.side) / (2.0 ** self.levels))

    @property
    def lowers(self) -> np.ndarray:
        return self._cached("lowers", lambda: self.root.lower + self.indices * self.sides[:, None])

    @property
    def centers(self) -> np.ndarray:
        return self._cached("centers", lambda: self.lowers + self.sides[:, None] / 2)

    def level_counts(self) -> Dict[int, int]:
        levels, counts = np.unique(self.levels, return_counts=True)
        return {int(l): int(c) for l, c in zip(levels, counts)}

    def covered_measure(self) -> float:
        return float(np.sum(self.sides ** self.n))

    def neighbor_pairs(self) -> np.ndarray:
        upper = sparse.triu(self.adjacency, k=1).tocoo()
        return np.stack([upper.row, upper.col], axis=1)

    def subset(self, mask: np.ndarray) -> List[DyadicCube]:
        return [c for c, keep in zip(self.cubes, mask) if keep]


def _child_offsets(n: int) -> np.ndarray:
    return np.array(list(product((0, 1), repeat=n)), dtype=np.int64)


# Relative width of the band around a bound inside which float verdicts are redone exactly
EXACT_BAND = 1e-9


def exact_distance_sq(oracle: DomainOracle, cube: DyadicCube) -> Union[Fraction, None]:
    """Squared cube-to-boundary distance in rationals, None when the oracle has no exact form."""
    exact = getattr(oracle, "exact_box_distance_sq", None)
    if exact is None:
        return None
    lower = cube.corner
    return exact(lower, tuple(c + cube.side for c in lower))


def settle_bound(oracle: DomainOracle, cube_at: Callable[[int], DyadicCube], verdict: np.ndarray,
                 dist: np.ndarray, bound: np.ndarray, factor_sq: int, at_least: bool) -> np.ndarray:
    """
    Redoes `dist >= bound` (or `<=`) as `dist^2 vs factor_sq * n * l^2` in
    rationals for cubes whose float distance sits within EXACT_BAND of the
    bound. Oracles without an exact form keep the float verdict.
    """
    if not hasattr(oracle, "exact_box_distance_sq"):
        return verdict
    near = np.flatnonzero(np.isfinite(dist) & (np.abs(dist - bound) <= EXACT_BAND * bound))
    if len(near) == 0:
        return verdict
    verdict = verdict.copy()
    for i in near:
        cube = cube_at(int(i))
        d2 = exact_distance_sq(oracle, cube)
        limit = factor_sq * cube.n * cube.side ** 2
        verdict[i] = d2 >= limit if at_least else d2 <= limit
    return verdict


def whitney_decompose(oracle: DomainOracle, root: RootBox, j_max: int,
                      allow_empty: bool = False) -> WhitneyCover:
    """
    Dyadic Whitney decomposition of the open set described by `oracle` inside
    the root box. A cube is accepted when it lies in the set and its distance
    to the boundary is at least sqrt(n) times its side; otherwise it is split.
    Cubes inside the set at level j_max are accepted without the lower bound
    and flagged truncated.
    """
    if j_max < 2:
        raise ValueError(f"j_max must be >= 2, got {j_max}")
    n = root.n
    sqrt_n = math.sqrt(n)
    offsets = _child_offsets(n)
    origin = root.lower
    root_side = float(root.side)

    frontier = np.zeros((1, n), dtype=np.int64)
    accepted: List[Tuple[int, np.ndarray, np.ndarray, np.ndarray]] = []

    for level in range(j_max + 1):
        if len(frontier) == 0:
            break
        side = root_side / (1 << level)
        lower = origin + frontier * side
        upper = lower + side
        centers = lower + side / 2

        dist = oracle.box_distance(lower, upper)
        center_in = oracle.contains(centers)
        center_dist = oracle.boundary_distance(centers)
        bad = (center_in & ~(center_dist > 0)) | (dist > center_dist + 1e-12 * max(1.0, root_side))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise OracleInconsistent(
                f"contains/boundary_distance disagree at {centers[i].tolist()}",
                {"center": centers[i].tolist(), "level": level,
                 "box_distance": float(dist[i]), "center_distance": float(center_dist[i])})

        inside = center_in & (dist > 0)
        bound = np.full(len(frontier), sqrt_n * side)
        meets = settle_bound(
            oracle, lambda i: DyadicCube(level, tuple(int(v) for v in frontier[i]), root),
            dist >= bound, np.where(inside, dist, np.inf), bound, 1, True)
        accept = inside & meets
        truncated = np.zeros(len(frontier), dtype=bool)
        if level == j_max:
            truncated = inside & ~accept
            accept = inside
        if np.any(accept):
            accepted.append((level, frontier[accept], truncated[accept], dist[accept]))

        # Split every cube that may still meet the set
        outside = ~center_in & (dist > 0)
        split = frontier[~accept & ~outside]
        frontier = (2 * split[:, None, :] + offsets[None, :, :]).reshape(-1, n)
        logger.debug(f"level {level}: accepted {int(np.sum(accept))}, splitting {len(split)}")

    cubes: List[DyadicCube] = []
    flags: List[np.ndarray] = []
    dists: List[np.ndarray] = []
    for level, idx, trunc, d in accepted:
        cubes.extend(DyadicCube(level, tuple(int(v) for v in row), root) for row in idx)
        flags.append(trunc)
        dists.append(d)

    if not cubes and not allow_empty:
        raise EmptyDomain(
            f"No cube accepted up to level {j_max} for {oracle.kind}",
            {"kind": oracle.kind, "j_max": j_max})

    truncated_flags = np.concatenate(flags) if flags else np.zeros(0, dtype=bool)
    distances = np.concatenate(dists) if dists else np.zeros(0)
    adjacency = build_adjacency(cubes, root, j_max)
    cover = WhitneyCover(tuple(cubes), truncated_flags, distances, adjacency, oracle, root, j_max)
    logger.info(f"Whitney cover of {oracle.kind}: {len(cubes)} cubes, levels {cover.level_counts()}")
    return cover


def fine_spans(cubes: Sequence[DyadicCube], j_max: int) -> Tuple[np.ndarray, np.ndarray]:
    if not cubes:
        return np.zeros((0, 0), dtype=np.int64), np.zeros((0, 0), dtype=np.int64)
    levels = np.array([c.level for c in cubes], dtype=np.int64)
    idx = np.array([c.index for c in cubes], dtype=np.int64)
    scale = np.left_shift(1, j_max - levels)[:, None]
    lo = idx * scale
    return lo, lo + scale


def build_adjacency(cubes: Sequence[DyadicCube], root: RootBox, j_max: int) -> sparse.csr_matrix:
    """Touching pairs (closed cubes meet, interiors disjoint), weighted by center distance."""
    count = len(cubes)
    if count == 0:
        return sparse.csr_matrix((0, 0))
    sides = np.array([c.side_f for c in cubes])
    centers = np.array([c.center_f for c in cubes])
    tree = cKDTree(centers)
    # A touching neighbour up to 4 times larger sits within (1 + 4) / 2 sides in max-norm
    candidates = tree.query_ball_point(centers, r=2.5 * sides * (1 + 1e-9), p=np.inf)
    rows = np.repeat(np.arange(count), [len(c) for c in candidates])
    cols = np.concatenate([np.asarray(c, dtype=np.int64) for c in candidates]) \
        if rows.size else np.zeros(0, dtype=np.int64)
    keep = rows < cols
    rows, cols = rows[keep], cols[keep]

    lo, hi = fine_spans(cubes, j_max)
    closed = np.all((lo[rows] <= hi[cols]) & (lo[cols] <= hi[rows]), axis=1)
    overlap = np.all((lo[rows] < hi[cols]) & (lo[cols] < hi[rows]), axis=1)
    touch = closed & ~overlap
    if np.any(overlap):
        i = int(np.argmax(overlap))
        raise OracleInconsistent(
            f"Cubes {cubes[rows[i]]} and {cubes[cols[i]]} overlap",
            {"pair": [int(rows[i]), int(cols[i])]})
    rows, cols = rows[touch], cols[touch]
    weights = np.linalg.norm(centers[rows] - centers[cols], axis=1)
    matrix = sparse.coo_matrix((weights, (rows, cols)), shape=(count, count))
    return (matrix + matrix.T).tocsr()


def check_whitney_invariants(cover: WhitneyCover) -> Dict[str, Any]:
    """
    Distance band of non-truncated cubes and side ratios of touching pairs.
    Bounds are compared without slack, exactly on polygonal oracles.
    """
    sqrt_n = math.sqrt(cover.n)
    regular = np.flatnonzero(~cover.truncated)
    dist = cover.distances[regular]
    sides = cover.sides[regular]
    ratios = dist / sides

    def cube_at(i):
        return cover.cubes[regular[i]]

    lower_ok = bool(np.all(settle_bound(cover.oracle, cube_at, dist >= sqrt_n * sides,
                                        dist, sqrt_n * sides, 1, True)))
    upper_ok = bool(np.all(settle_bound(cover.oracle, cube_at, dist <= 4 * sqrt_n * sides,
                                        dist, 4 * sqrt_n * sides, 16, False)))
    pairs = cover.neighbor_pairs()
    if len(pairs):
        side_ratio = cover.sides[pairs[:, 0]] / cover.sides[pairs[:, 1]]
        min_side_ratio, max_side_ratio = float(side_ratio.min()), float(side_ratio.max())
    else:
        min_side_ratio = max_side_ratio = 1.0
    min_ratio = float(ratios.min()) if ratios.size else float("nan")
    max_ratio = float(ratios.max()) if ratios.size else float("nan")
    neighbor_ok = min_side_ratio >= 0.25 and max_side_ratio <= 4.0
    return {
        "cubes": len(cover),
        "truncated": int(np.sum(cover.truncated)),
        "level_counts": cover.level_counts(),
        "min_dist_ratio": min_ratio,
        "max_dist_ratio": max_ratio,
        "lower_bound_ok": lower_ok,
        "upper_bound_ok": upper_ok,
        "min_neighbor_ratio": min_side_ratio,
        "max_neighbor_ratio": max_side_ratio,
        "neighbor_ratio_ok": bool(neighbor_ok),
        "covered_measure": cover.covered_measure(),
        "ok": bool(lower_ok and upper_ok and neighbor_ok),
    }


def small_cubes(cover: WhitneyCover, eps: float, delta: float) -> List[DyadicCube]:
    """Cubes with side at most eps*delta/(16 n); delta may be +inf."""
    cutoff = small_cube_cutoff(eps, delta, cover.n)
    return [c for c, side in zip(cover.cubes, cover.sides) if side <= cutoff]


def small_cube_cutoff(eps: float, delta: float, n: int) -> float:
    if not (eps > 0 and delta > 0):
        raise ValueError(f"eps and delta must be positive, got {eps}, {delta}")
    return eps * delta / (16 * n)
