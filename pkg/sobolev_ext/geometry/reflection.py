import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from ..config import Config
from ..errors import NoReflection
from .cubes import DyadicCube, cube_distance
from .whitney import WhitneyCover

logger = logging.getLogger(__name__)


@dataclass
class ReflectionMap:
    """Q -> Q* for small exterior cubes, with the realized constant sup dist(Q, Q*)/l(Q)."""

    mapping: Dict[DyadicCube, DyadicCube]
    realized_constant: float
    search_radius_factor: float
    fallbacks: List[DyadicCube] = field(default_factory=list)

    def __getitem__(self, cube: DyadicCube) -> DyadicCube:
        return self.mapping[cube]

    def __len__(self):
        return len(self.mapping)

    def ratios(self) -> np.ndarray:
        return np.array([cube_distance(q, r) / q.side_f for q, r in self.mapping.items()])


def reflect_cubes(outside_small: Sequence[DyadicCube], inside: WhitneyCover,
                  search_radius_factor: Union[float, None] = None,
                  fallback_nearest: bool = False) -> ReflectionMap:
    """
    For each exterior cube Q pick Q* among the inside cubes with
    l(Q) <= l(Q*) <= 4 l(Q), minimizing center distance within
    search_radius_factor * l(Q); ties go to the smaller (level, index).

    With `fallback_nearest`, a cube without admissible candidate is mapped to
    the nearest inside cube of any size instead of raising; such cubes are
    listed in `fallbacks`.
    """
    factor = Config.reflection_search_factor if search_radius_factor is None else search_radius_factor
    by_level: Dict[int, np.ndarray] = {}
    levels = inside.levels
    for level in np.unique(levels):
        by_level[int(level)] = np.flatnonzero(levels == level)
    trees = {level: cKDTree(inside.centers[idx]) for level, idx in by_level.items()}
    all_tree = cKDTree(inside.centers) if fallback_nearest and len(inside) else None

    mapping: Dict[DyadicCube, DyadicCube] = {}
    fallbacks: List[DyadicCube] = []
    worst = 0.0
    for q in outside_small:
        radius = factor * q.side_f
        center = q.center_f
        best = None
        best_key = None
        # Admissible sides l(Q)..4 l(Q) are levels q.level-2 .. q.level
        for level in (q.level - 2, q.level - 1, q.level):
            if level not in trees:
                continue
            idx = by_level[level]
            for local in trees[level].query_ball_point(center, r=radius):
                cand = inside.cubes[idx[local]]
                d = float(np.linalg.norm(inside.centers[idx[local]] - center))
                key = (d, cand.level, cand.index)
                if best_key is None or key < best_key:
                    best, best_key = cand, key
        if best is None:
            if all_tree is None:
                raise NoReflection(q, radius)
            _, i = all_tree.query(center)
            best = inside.cubes[int(i)]
            fallbacks.append(q)
        mapping[q] = best
        worst = max(worst, cube_distance(q, best) / q.side_f)

    if fallbacks:
        logger.info(f"{len(fallbacks)} exterior cubes had no admissible reflection")
    logger.debug(f"Reflected {len(mapping)} cubes, realized constant {worst:.3f}")
    return ReflectionMap(mapping, worst, factor, fallbacks)
