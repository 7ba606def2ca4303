"""
The extension operator of order k: u inside the domain, and
sum_Q phi_Q P_{Q*}(u) over small exterior Whitney cubes outside it.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Union

import numpy as np
from scipy.spatial import cKDTree

from ..errors import PlanGap, SupportLeak
from ..funcspace.fields import AnalyticField, GridField, lattice_points
from ..funcspace.norms import grid_terms, sobolev_norm
from ..funcspace.polynomial import PolynomialBatch, best_fit_polynomials
from ..funcspace.quadrature import cube_gauss_nodes
from .plan import ExtensionPlan, lattice_for_root

logger = logging.getLogger(__name__)


@dataclass
class ExteriorEvaluation:
    """Per exterior point: the polynomial rows that reach it (COO layout) and the result."""

    points: np.ndarray
    rows: np.ndarray
    cubes: np.ndarray
    weights: np.ndarray
    filled: np.ndarray
    values: np.ndarray


def _star_batch(u, plan: ExtensionPlan):
    """Best-fit polynomials of the distinct reflected cubes, and the row of each small cube."""
    stars = plan.stars()
    index: Dict = {}
    distinct = []
    rows = np.empty(len(stars), dtype=np.int64)
    for i, star in enumerate(stars):
        if star not in index:
            index[star] = len(distinct)
            distinct.append(star)
        rows[i] = index[star]
    return best_fit_polynomials(u, distinct, plan.k), rows, distinct


def evaluate_exterior(u, plan: ExtensionPlan, points: np.ndarray,
                      batch: Union[PolynomialBatch, None] = None,
                      star_rows: Union[np.ndarray, None] = None) -> ExteriorEvaluation:
    if batch is None:
        batch, star_rows, _ = _star_batch(u, plan)
    values = np.zeros(len(points))
    if not plan.small or len(points) == 0:
        return ExteriorEvaluation(points, np.zeros(0, int), np.zeros(0, int), np.zeros(0),
                                  np.zeros(len(points), bool), values)

    phi = plan.partition.matrix(points, strict=True).tocoo()
    contrib = phi.data * batch.evaluate_pairs(star_rows[phi.col], points[phi.row])
    values += np.bincount(phi.row, weights=contrib, minlength=len(points))

    covered = np.bincount(phi.row, minlength=len(points)) > 0
    dist = plan.oracle.boundary_distance(points)
    band = plan.truncation_band
    gap = ~covered & (dist >= band) & (dist <= plan.collar)
    if np.any(gap):
        i = int(np.argmax(gap))
        raise PlanGap(
            f"Exterior point {points[i].tolist()} at distance {dist[i]:.4g} lies in no small cube",
            {"point": points[i].tolist(), "distance": float(dist[i]), "collar": plan.collar})

    # Truncated collar: nearest small cube's reflected polynomial
    filled = ~covered & (dist < band)
    if np.any(filled):
        centers = np.array([q.center_f for q in plan.small])
        _, nearest = cKDTree(centers).query(points[filled])
        values[filled] = batch.evaluate_pairs(star_rows[nearest], points[filled])
    return ExteriorEvaluation(points, phi.row, phi.col, phi.data, filled, values)


def jones_extend(u: AnalyticField, plan: ExtensionPlan, grid: int) -> GridField:
    """Values on the cell-centered lattice of `grid` cells per side of the root box."""
    origin, h, dims = lattice_for_root(plan.root, grid)
    points = lattice_points(origin, h, dims)
    inside = plan.oracle.contains(points)
    values = np.zeros(len(points))
    values[inside] = u.value(points[inside])
    exterior = evaluate_exterior(u, plan, points[~inside])
    values[~inside] = exterior.values
    logger.debug(f"Extended {plan.oracle.kind} on {dims}: {int(inside.sum())} inside, "
                 f"{int(np.count_nonzero(exterior.values))} nonzero outside")
    return GridField(origin, h, values.reshape(dims), mask=inside.reshape(dims),
                     label=f"jones:{plan.oracle.kind}")


def extension_norm_ratio(u: AnalyticField, ext: GridField, plan: ExtensionPlan,
                         k: int, p: float) -> Dict[str, float]:
    """
    ||ext||_{W^{k,p}} over the domain plus an exterior collar, over ||u||_{W^{k,p}(Omega)}.
    The collar stays inside the small-cube union, where the extension has no jump.
    """
    points = ext.points()
    inside = plan.oracle.contains(points)
    near = plan.oracle.boundary_distance(points) < plan.collar / 2
    mask = (inside | near).reshape(ext.dims)
    extended = float(sum(grid_terms(ext, mask, k, p).values()))
    lower, upper = plan.root.lower, plan.root.upper
    grid = ext.dims[0]
    original = sobolev_norm(u, plan.oracle, k, p, grid, (lower, upper))
    return {
        "h": ext.h,
        "extended_norm": extended,
        "norm": original,
        "ratio": extended / original if original > 0 else float("nan"),
    }


@dataclass
class SupportReport:
    contact_set_ok: bool
    enlargement_radius: float
    violations: List[List[float]] = field(default_factory=list)
    checked_zero: int = 0

    def to_record(self) -> dict:
        return {"contact_set_ok": self.contact_set_ok,
                "enlargement_radius": self.enlargement_radius,
                "violations": self.violations[:20],
                "checked_zero": self.checked_zero}


def cubes_meet_support(u: AnalyticField, cubes, cells: int = 3) -> np.ndarray:
    """True for cubes on which u is nonzero at some Gauss node of a cells^n subdivision."""
    if not cubes:
        return np.zeros(0, dtype=bool)
    lowers = np.array([c.lower_f for c in cubes])
    sides = np.array([c.side_f for c in cubes])
    nodes = cube_gauss_nodes(lowers, sides, cells)
    values = u.value(nodes.reshape(-1, lowers.shape[1])).reshape(len(cubes), -1)
    return np.any(values != 0, axis=1)


def support_diagnostics(u: AnalyticField, ext: GridField, plan: ExtensionPlan,
                        raise_on_leak: bool = True) -> SupportReport:
    """
    An exterior sample whose contributing reflected cubes all miss supp u must be
    exactly 0. The enlargement radius is the largest distance from a nonzero
    exterior sample to the sampled support of u.
    """
    points = ext.points()
    values = ext.values.reshape(-1)
    inside = plan.oracle.contains(points)
    support = points[inside & (values != 0)]

    exterior_points = points[~inside]
    exterior_values = values[~inside]
    batch, star_rows, distinct = _star_batch(u, plan)
    meets = cubes_meet_support(u, distinct)
    evaluation = evaluate_exterior(u, plan, exterior_points, batch, star_rows)

    touched = np.zeros(len(exterior_points), dtype=bool)
    if len(evaluation.rows):
        hit = meets[star_rows[evaluation.cubes]]
        touched |= np.bincount(evaluation.rows, weights=hit.astype(float),
                               minlength=len(exterior_points)) > 0
    if np.any(evaluation.filled):
        centers = np.array([q.center_f for q in plan.small])
        _, nearest = cKDTree(centers).query(exterior_points[evaluation.filled])
        touched[evaluation.filled] = meets[star_rows[nearest]]

    must_vanish = ~touched
    leaks = must_vanish & (exterior_values != 0)
    violations = exterior_points[leaks].tolist()

    nonzero = exterior_points[exterior_values != 0]
    if len(nonzero) and len(support):
        radius = float(np.max(cKDTree(support).query(nonzero)[0]))
    elif len(nonzero):
        radius = float("inf")
    else:
        radius = 0.0
    report = SupportReport(not violations, radius, violations, int(must_vanish.sum()))
    if violations and raise_on_leak:
        raise SupportLeak(f"{len(violations)} exterior samples should vanish but do not",
                          report.to_record())
    return report
