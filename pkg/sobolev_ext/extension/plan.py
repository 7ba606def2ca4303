import logging
import math
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from ..config import Config
from ..geometry.cubes import DyadicCube, RootBox
from ..geometry.domains import ComplementDomain, DomainOracle
from ..geometry.partition import PartitionOfUnity
from ..geometry.reflection import ReflectionMap, reflect_cubes
from ..geometry.whitney import WhitneyCover, small_cube_cutoff, small_cubes, whitney_decompose
from ..globals import Global

logger = logging.getLogger(__name__)


@dataclass
class ExtensionPlan:
    """Everything the extension operator of order k needs besides the function."""

    oracle: DomainOracle
    root: RootBox
    inside: WhitneyCover
    outside: WhitneyCover
    small: List[DyadicCube]
    reflection: ReflectionMap
    partition: PartitionOfUnity
    k: int
    eps: float
    delta: float

    @property
    def n(self) -> int:
        return self.root.n

    @property
    def cutoff(self) -> float:
        return small_cube_cutoff(self.eps, self.delta, self.n)

    @property
    def finest_side(self) -> float:
        return float(self.root.side) / 2 ** self.outside.j_max

    @property
    def truncation_band(self) -> float:
        """Exterior points closer than this to the boundary may lie in no cube."""
        return 2 * math.sqrt(self.n) * self.finest_side

    @property
    def collar(self) -> float:
        """Exterior points closer than this to the boundary lie in small cubes."""
        return math.sqrt(self.n) * self.cutoff

    def stars(self) -> List[DyadicCube]:
        return [self.reflection[q] for q in self.small]

    def summary(self) -> Dict[str, float]:
        return {
            "inside_cubes": len(self.inside),
            "outside_cubes": len(self.outside),
            "small_cubes": len(self.small),
            "reflection_constant": self.reflection.realized_constant,
            "fallbacks": len(self.reflection.fallbacks),
            "cutoff": self.cutoff,
            "k": self.k,
        }


def build_extension_plan(oracle: DomainOracle, root: RootBox, k: int,
                         eps: float = 1.0, delta: float = 1.0, j_max: int = None,
                         search_radius_factor: float = None,
                         fallback_nearest: bool = False) -> ExtensionPlan:
    j_max = Config.j_max if j_max is None else j_max
    key = ("plan", repr(oracle.describe()), root, j_max, eps, delta, search_radius_factor,
           fallback_nearest)

    def build():
        inside = whitney_decompose(oracle, root, j_max)
        outside = whitney_decompose(ComplementDomain(oracle, root.lower, root.upper), root, j_max)
        small = small_cubes(outside, eps, delta)
        reflection = reflect_cubes(small, inside, search_radius_factor, fallback_nearest)
        return inside, outside, small, reflection, PartitionOfUnity(small)

    inside, outside, small, reflection, partition = Global.cover_cache.get_or_build(key, build)
    plan = ExtensionPlan(oracle, root, inside, outside, small, reflection, partition, k, eps, delta)
    logger.info(f"Extension plan for {oracle.kind}: {plan.summary()}")
    return plan


def lattice_for_root(root: RootBox, grid: int):
    """Cell-centered lattice of `grid` cells per side over the root box."""
    h = float(root.side) / grid
    return root.lower, h, (grid,) * root.n


def default_j_max(grid: int) -> int:
    """Finest cube side at most a quarter of the lattice spacing."""
    return int(np.ceil(np.log2(grid))) + 2
