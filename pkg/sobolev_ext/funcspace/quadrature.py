import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from ..config import Config
from ..errors import SingularQuadraturePoint
from ..geometry.domains import DomainOracle
from .fields import lattice_points

logger = logging.getLogger(__name__)

# 2-point Gauss-Legendre nodes on [0, 1]
GAUSS2 = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])


@dataclass
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    h: float
    interior_cells: int
    boundary_cells: int

    def __len__(self):
        return len(self.weights)

    @property
    def volume(self) -> float:
        return float(np.sum(self.weights))

    def integrate(self, values: np.ndarray) -> float:
        values = np.asarray(values, dtype=float)
        if values.ndim > 1:
            values = values.reshape(len(self.weights), -1).sum(axis=1)
        return float(np.dot(self.weights, values))


def lattice_box(oracle: DomainOracle, grid: int,
                box: Union[Tuple[Sequence[float], Sequence[float]], None] = None
                ) -> Tuple[np.ndarray, float, Tuple[int, ...]]:
    """Lower corner, spacing and dims of a lattice with `grid` cells along the longest box side."""
    lower, upper = box if box is not None else oracle.bbox
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if not np.all(np.isfinite(lower) & np.isfinite(upper)):
        raise ValueError(f"Quadrature over {oracle.kind} needs an explicit bounded box")
    h = float(np.max(upper - lower)) / grid
    dims = tuple(int(v) for v in np.maximum(1, np.ceil((upper - lower) / h - 1e-9)))
    return lower, h, dims


def domain_quadrature(oracle: DomainOracle, grid: int,
                      box: Union[Tuple[Sequence[float], Sequence[float]], None] = None,
                      subsample: Union[int, None] = None,
                      singular_points: Union[np.ndarray, None] = None) -> QuadratureRule:
    """
    Midpoint rule on a cell-centered lattice. Cells whose center is farther than
    half a diagonal from the boundary are interior (one node) or discarded;
    the remaining boundary cells are subsampled with `subsample`^n midpoints
    and only the subpoints inside the domain are kept.
    """
    subsample = Config.boundary_subsample if subsample is None else subsample
    lower, h, dims = lattice_box(oracle, grid, box)
    n = len(lower)
    centers = lattice_points(lower, h, dims)
    half_diag = math.sqrt(n) * h / 2

    dist = oracle.boundary_distance(centers)
    inside = oracle.contains(centers)
    near = dist <= half_diag
    interior = inside & ~near

    sub = (np.arange(subsample) + 0.5) / subsample - 0.5
    offsets = np.stack([m.reshape(-1) for m in np.meshgrid(*([sub] * n), indexing="ij")], axis=1) * h
    boundary_centers = centers[near]
    fine = (boundary_centers[:, None, :] + offsets[None, :, :]).reshape(-1, n)
    fine = fine[oracle.contains(fine)] if len(fine) else fine

    points = np.concatenate([centers[interior], fine])
    weights = np.concatenate([np.full(int(interior.sum()), h ** n),
                              np.full(len(fine), (h / subsample) ** n)])
    check_singular_nodes(points, singular_points, h / subsample)
    logger.debug(f"Quadrature on {oracle.kind}: h={h:.4g}, {int(interior.sum())} interior cells, "
                 f"{int(near.sum())} boundary cells")
    return QuadratureRule(points, weights, h, int(interior.sum()), int(near.sum()))


def lattice_quadrature(lower: Sequence[float], h: float, dims: Sequence[int],
                       mask: Union[np.ndarray, None] = None) -> QuadratureRule:
    """One node per cell of a full lattice, optionally restricted to a boolean mask."""
    points = lattice_points(np.asarray(lower, dtype=float), h, dims)
    keep = np.ones(len(points), dtype=bool) if mask is None else np.asarray(mask).reshape(-1)
    n = len(dims)
    return QuadratureRule(points[keep], np.full(int(keep.sum()), h ** n), h, int(keep.sum()), 0)


def check_singular_nodes(points: np.ndarray, singular_points: Union[np.ndarray, None],
                         spacing: float) -> None:
    if singular_points is None or singular_points.size == 0 or len(points) == 0:
        return
    tol = 1e-9 * spacing
    for s in np.atleast_2d(singular_points):
        d = np.linalg.norm(points - s, axis=1)
        i = int(np.argmin(d))
        if d[i] <= tol:
            raise SingularQuadraturePoint(
                f"Quadrature node {points[i].tolist()} hits the singular point {s.tolist()}",
                {"node": points[i].tolist(), "singular_point": s.tolist()})


def cube_gauss_nodes(lowers: np.ndarray, sides: np.ndarray, cells: int) -> np.ndarray:
    """
    Tensor 2-point Gauss nodes on `cells`^n subcells of each cube, shaped
    (cubes, nodes, n). All nodes of a cube carry equal weight.
    """
    n = lowers.shape[1]
    ref = ((np.arange(cells)[:, None] + GAUSS2[None, :]) / cells).reshape(-1)
    grid = np.stack([m.reshape(-1) for m in np.meshgrid(*([ref] * n), indexing="ij")], axis=1)
    return lowers[:, None, :] + sides[:, None, None] * grid[None, :, :]


def gauss_legendre(a: float, b: float, count: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(count)
    return a + (b - a) * (x + 1) / 2, w * (b - a) / 2
