import logging
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from ..errors import CollarViolation
from ..funcspace.fields import AnalyticField, GridField, lattice_points
from ..funcspace.norms import grid_terms
from ..funcspace.quadrature import lattice_box
from ..geometry.domains import DomainOracle

logger = logging.getLogger(__name__)


@dataclass
class ZeroExtension:
    field: GridField
    norm: float
    norm_inside: float

    @property
    def relative_defect(self) -> float:
        if self.norm_inside == 0:
            return 0.0 if self.norm == 0 else float("inf")
        return abs(self.norm - self.norm_inside) / self.norm_inside

    def to_record(self) -> dict:
        return {"h": self.field.h, "norm": self.norm, "norm_inside": self.norm_inside,
                "relative_defect": self.relative_defect}


def check_collar(u: AnalyticField, oracle: DomainOracle, points: np.ndarray, collar: float) -> None:
    inside = oracle.contains(points)
    near = inside & (oracle.boundary_distance(points) < collar)
    if not np.any(near):
        return
    values = np.abs(u.value(points[near]))
    if values.ndim > 1:
        values = values.max(axis=1)
    bad = values > 0
    if np.any(bad):
        offenders = points[near][bad]
        raise CollarViolation(
            f"u is nonzero at {int(bad.sum())} samples within {collar:g} of the boundary",
            {"collar": collar, "points": offenders[:20].tolist(),
             "max_abs": float(values.max())})


def extend_by_zero(u: AnalyticField, oracle: DomainOracle, grid: int, k: int = 1, p: float = 2.0,
                   box: Union[Tuple[Sequence[float], Sequence[float]], None] = None,
                   collar: Union[float, None] = None) -> ZeroExtension:
    """
    u on the domain, 0 elsewhere. The collar defaults to (k+1) lattice spacings,
    the reach of the k-fold difference stencil.
    """
    lower, h, dims = lattice_box(oracle, grid, box)
    collar = (k + 1) * h if collar is None else collar
    if collar < (k + 1) * h:
        raise ValueError(f"Collar {collar:g} is thinner than {k + 1} lattice spacings")
    points = lattice_points(lower, h, dims)
    check_collar(u, oracle, points, collar)

    inside = oracle.contains(points)
    values = np.zeros(len(points))
    values[inside] = u.value(points[inside])
    mask = inside.reshape(dims)
    field = GridField(lower, h, values.reshape(dims), mask=mask, label=f"zero:{oracle.kind}")
    whole = float(sum(grid_terms(field, np.ones(dims, dtype=bool), k, p).values()))
    restricted = float(sum(grid_terms(field, mask, k, p).values()))
    result = ZeroExtension(field, whole, restricted)
    logger.debug(f"Extension by zero on {oracle.kind}: {result.to_record()}")
    return result
