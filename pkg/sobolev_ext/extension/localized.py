"""
Extension for domains that are (eps, delta) only near N = boundary minus D.

Inside the domain the output is u. Outside it is
    sum_j phi_j Lambda_j(E_j(psi_j u)),  phi_j = eta psi_j / sum_i psi_i^2,
with psi_j a mollified indicator of the shrunken patch ball, eta a mollified
indicator of the r/4-neighborhood of N, and Lambda_j the extension plan of the
patch domain. u must vanish on a collar of D.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ..errors import CollarViolation, PatchGap
from ..funcspace.fields import AnalyticField, GridField, lattice_points
from ..funcspace.norms import grid_terms, sobolev_norm
from ..geometry.boundary import BoundaryPart, boundary_samples
from ..geometry.cubes import RootBox
from ..geometry.domains import DomainOracle
from .jones import evaluate_exterior
from .mollify import indicator, mollify
from .plan import ExtensionPlan, lattice_for_root

logger = logging.getLogger(__name__)


@dataclass
class Patch:
    """Ball O_j = B(center, radius), with an (eps, delta) domain agreeing with Omega on O_j."""

    center: np.ndarray
    radius: float
    oracle: DomainOracle
    plan: ExtensionPlan

    @property
    def is_global(self) -> bool:
        return not np.isfinite(self.radius)

    def inside(self, x: np.ndarray, shrink: float = 0.0) -> np.ndarray:
        if self.is_global:
            return np.ones(len(x), dtype=bool)
        return np.linalg.norm(x - self.center, axis=1) < self.radius - shrink


@dataclass
class LocalizedPlan:
    oracle: DomainOracle
    dirichlet: BoundaryPart
    patches: List[Patch]
    r: float
    root: RootBox
    k: int
    free_samples: np.ndarray
    max_overlap: int

    @property
    def is_global(self) -> bool:
        return len(self.patches) == 1 and self.patches[0].is_global


def free_boundary_samples(oracle: DomainOracle, dirichlet: BoundaryPart, spacing: float) -> np.ndarray:
    """Samples of N, the boundary minus the relative interior of D."""
    if dirichlet.is_empty:
        return boundary_samples(oracle, spacing)
    if dirichlet.covers(oracle):
        return np.zeros((0, oracle.n))
    samples = boundary_samples(oracle, spacing)
    return samples[dirichlet.distance(samples) > spacing / 2]


def build_localized_plan(oracle: DomainOracle, dirichlet: BoundaryPart, patches: Sequence[Patch],
                         r: float, root: RootBox, k: int, spacing: float = None) -> LocalizedPlan:
    """Checks that every sampled x in N has some patch with B(x, r) inside O_j."""
    spacing = r / 8 if spacing is None else spacing
    free = free_boundary_samples(oracle, dirichlet, spacing)
    patches = list(patches) if len(free) else []
    overlap = 0
    if len(free):
        fits = np.zeros((len(free), len(patches)), dtype=bool)
        for j, patch in enumerate(patches):
            fits[:, j] = patch.inside(free, shrink=r) | patch.is_global
        missing = ~fits.any(axis=1)
        if np.any(missing):
            x = free[int(np.argmax(missing))]
            raise PatchGap(f"Boundary point {x.tolist()} has no patch containing B(x, {r:g})",
                           {"point": x.tolist(), "r": r, "patches": len(patches)})
        overlap = int(np.max(np.sum([p.inside(free) for p in patches], axis=0)))
    plan = LocalizedPlan(oracle, dirichlet, patches, r, root, k, free, overlap)
    logger.info(f"Localized plan for {oracle.kind}: {len(patches)} patches, "
                f"{len(free)} free-boundary samples, overlap {overlap}")
    return plan


@dataclass
class LocalizedCutoffs:
    eta: np.ndarray
    psi: List[np.ndarray]
    phi: List[np.ndarray]


def cutoffs(plan: LocalizedPlan, origin: np.ndarray, h: float, dims) -> LocalizedCutoffs:
    points = lattice_points(origin, h, dims)
    if plan.is_global:
        ones = np.ones(len(points))
        return LocalizedCutoffs(ones, [ones], [ones])
    if not plan.patches:
        zeros = np.zeros(len(points))
        return LocalizedCutoffs(zeros, [], [])
    r = plan.r
    near_free = cKDTree(plan.free_samples).query(points)[0] < r / 4
    eta = mollify(indicator(origin, h, dims, near_free), r / 8).values.reshape(-1)
    psi = [mollify(indicator(origin, h, dims, p.inside(points, shrink=r / 4)), r / 4).values.reshape(-1)
           for p in plan.patches]
    total = np.sum([q ** 2 for q in psi], axis=0)
    live = total > 0
    phi = []
    for q in psi:
        out = np.zeros(len(points))
        out[live] = eta[live] * q[live] / total[live]
        phi.append(out)
    return LocalizedCutoffs(eta, psi, phi)


@dataclass
class LocalizedResult:
    field: GridField
    restriction_defect: float
    dirichlet_trace: float
    norm_ratio: Dict[str, float]

    def to_record(self) -> dict:
        return {"restriction_defect": self.restriction_defect,
                "dirichlet_trace": self.dirichlet_trace, **self.norm_ratio}


def _patch_field(u: AnalyticField, psi: GridField, patch: Patch) -> AnalyticField:
    if patch.is_global:
        return u
    interp = psi.interpolator()

    def run(x):
        out = interp(x) * u.value(x)
        return np.where(patch.inside(x), out, 0.0)

    return AnalyticField(run, u.n, label=f"patch:{u.label}")


def localized_extend(u: AnalyticField, plan: LocalizedPlan, grid: int, p: float = 2.0) -> LocalizedResult:
    origin, h, dims = lattice_for_root(plan.root, grid)
    points = lattice_points(origin, h, dims)
    inside = plan.oracle.contains(points)
    check_dirichlet_collar(u, plan.dirichlet, points, inside, h)

    values = np.zeros(len(points))
    u_inside = u.value(points[inside])
    values[inside] = u_inside
    cut = cutoffs(plan, origin, h, dims)

    # (1 - eta) u + sum_j phi_j psi_j u on the domain
    recombined = (1 - cut.eta[inside]) * u_inside
    exterior = ~inside
    for patch, psi, phi in zip(plan.patches, cut.psi, cut.phi):
        recombined += phi[inside] * psi[inside] * u_inside
        live = exterior & (phi > 0)
        if not np.any(live):
            continue
        field_j = _patch_field(u, GridField(origin, h, psi.reshape(dims)), patch)
        target = points[live]
        in_patch_domain = patch.oracle.contains(target)
        local = np.zeros(len(target))
        local[in_patch_domain] = field_j.value(target[in_patch_domain])
        if np.any(~in_patch_domain):
            local[~in_patch_domain] = evaluate_exterior(field_j, patch.plan, target[~in_patch_domain]).values
        values[live] += phi[live] * local
    defect = float(np.max(np.abs(recombined - u_inside))) if len(u_inside) else 0.0

    field = GridField(origin, h, values.reshape(dims), mask=inside.reshape(dims),
                      label=f"localized:{plan.oracle.kind}")
    trace = _dirichlet_trace(field, plan.dirichlet, h)
    ratio = _norm_ratio(u, field, plan, p)
    result = LocalizedResult(field, defect, trace, ratio)
    logger.debug(f"Localized extension on {dims}: {result.to_record()}")
    return result


def check_dirichlet_collar(u: AnalyticField, dirichlet: BoundaryPart, points: np.ndarray,
                           inside: np.ndarray, collar: float) -> None:
    near = inside & (dirichlet.distance(points) < collar)
    if not np.any(near):
        return
    values = np.abs(u.value(points[near]))
    if np.any(values > 0):
        raise CollarViolation(
            f"u is nonzero at {int(np.sum(values > 0))} samples within {collar:g} of D",
            {"collar": collar, "points": points[near][values > 0][:20].tolist(),
             "max_abs": float(values.max())})


def _dirichlet_trace(field: GridField, dirichlet: BoundaryPart, h: float) -> float:
    if dirichlet.is_empty:
        return 0.0
    samples = dirichlet.samples(h)
    if len(samples) == 0:
        return 0.0
    return float(np.max(np.abs(field.interpolator()(samples))))


def _norm_ratio(u: AnalyticField, ext: GridField, plan: LocalizedPlan, p: float) -> Dict[str, float]:
    points = ext.points()
    inside = plan.oracle.contains(points)
    if plan.is_global:
        reach = plan.patches[0].plan.collar / 2
    else:
        reach = plan.r / 2 if plan.patches else 0.0
    near = plan.oracle.boundary_distance(points) < reach
    mask = (inside | near).reshape(ext.dims)
    extended = float(sum(grid_terms(ext, mask, plan.k, p).values()))
    original = sobolev_norm(u, plan.oracle, plan.k, p, ext.dims[0], (plan.root.lower, plan.root.upper))
    return {"extended_norm": extended, "norm": original,
            "ratio": extended / original if original > 0 else float("nan")}
