"""
Membership scans: does a field belong to W^{k,p}?

`sobolev_norm_scan` refines the quadrature grid and reads the verdict off the
growth of the norm. `singular_norm_scan` integrates over dyadic shells around
a point singularity and reads it off the decay rate of the shell integrals,
which separates exponents close to a threshold at modest cost.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import pandas as pd

from ..config import Config
from ..errors import Inconclusive
from ..geometry.domains import DomainOracle
from .fields import AnalyticField
from .multiindex import multi_indices
from .norms import Box, _magnitude, sobolev_norm
from .quadrature import gauss_legendre

logger = logging.getLogger(__name__)


@dataclass
class ScanResult:
    verdict: str
    slope: float
    table: pd.DataFrame
    p: float
    k: int

    def to_record(self) -> dict:
        return {"verdict": self.verdict, "slope": self.slope, "p": self.p, "k": self.k,
                "table": self.table.to_dict(orient="list")}


def _inconclusive(message: str, result: ScanResult, raise_inconclusive: bool) -> ScanResult:
    if raise_inconclusive:
        raise Inconclusive(message, result.to_record())
    result.verdict = "inconclusive"
    return result


def sobolev_norm_scan(u: AnalyticField, oracle: DomainOracle, k: int, p: float,
                      grids: Sequence[int], box: Union[Box, None] = None,
                      raise_inconclusive: bool = True) -> ScanResult:
    if len(grids) < 3:
        raise ValueError(f"A norm scan needs at least 3 grids, got {list(grids)}")
    lower, upper = box if box is not None else oracle.bbox
    extent = float(np.max(np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float)))
    rows = []
    for grid in grids:
        value = sobolev_norm(u, oracle, k, p, grid, box)
        rows.append({"grid": int(grid), "h": extent / grid, "norm": value})
        logger.debug(f"scan k={k} p={p}: grid {grid} -> {value:.6g}")
    table = pd.DataFrame(rows)
    table["finite_differences"] = bool(u.uses_finite_differences(k))

    norms = table["norm"].to_numpy()
    if np.all(norms == 0):
        return ScanResult("converges", 0.0, table, p, k)
    slope = float(np.polyfit(np.log(1.0 / table["h"].to_numpy()), np.log(norms), 1)[0])
    result = ScanResult("", slope, table, p, k)
    if slope > Config.scan_diverge_slope:
        result.verdict = "diverges"
    elif abs(norms[-1] - norms[-2]) < Config.scan_converge_rel * abs(norms[-1]):
        result.verdict = "converges"
    else:
        return _inconclusive(f"Norm scan slope {slope:.4f} with last change "
                             f"{abs(norms[-1] - norms[-2]) / abs(norms[-1]):.2%}",
                             result, raise_inconclusive)
    return result


def sphere_directions(n: int, count: int) -> np.ndarray:
    """Equally spaced angles for n = 2, a fixed seeded sample of the sphere otherwise."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        angles = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    g = np.random.default_rng(20240101).standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_area(n: int) -> float:
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def singular_norm_scan(u: AnalyticField, center: Sequence[float], k: int, p: float,
                       radius: float = 1.0, levels: Union[int, None] = None,
                       directions: int = 256, radial_nodes: int = 8,
                       fit_from: Union[int, None] = None,
                       raise_inconclusive: bool = True) -> ScanResult:
    """
    Shell integrals I_j of sum_{|alpha|<=k} |d^alpha u|^p over
    radius*2^-(j+1) < |x - center| < radius*2^-j. The fitted slope of
    log2 I_j against j is positive exactly when the norm diverges at the
    center; `truncated_norm` is the norm over |x - center| > radius*2^-(j+1).
    """
    levels = Config.shell_levels if levels is None else levels
    fit_from = levels // 2 if fit_from is None else fit_from
    center = np.asarray(center, dtype=float)
    n = len(center)
    dirs = sphere_directions(n, directions)
    angular_weight = sphere_area(n) / len(dirs)
    alphas = multi_indices(n, k)

    rows = []
    cumulative = 0.0
    for j in range(levels):
        r, w = gauss_legendre(radius * 2.0 ** -(j + 1), radius * 2.0 ** -j, radial_nodes)
        points = (center[None, None, :] + r[:, None, None] * dirs[None, :, :]).reshape(-1, n)
        density = np.zeros(len(points))
        for alpha in alphas:
            density += _magnitude(u.derivative(alpha, points)) ** p
        per_radius = density.reshape(len(r), len(dirs)).sum(axis=1) * angular_weight
        shell = float(np.sum(w * r ** (n - 1) * per_radius))
        cumulative += shell
        rows.append({"level": j, "r_outer": radius * 2.0 ** -j, "shell_integral": shell,
                     "truncated_norm": cumulative ** (1.0 / p)})
    table = pd.DataFrame(rows)

    shells = table["shell_integral"].to_numpy()[fit_from:]
    if np.all(shells == 0):
        return ScanResult("converges", 0.0, table, p, k)
    if np.any(shells <= 0):
        return _inconclusive("Shell integrals vanish on part of the fitting window",
                             ScanResult("", float("nan"), table, p, k), raise_inconclusive)
    slope = float(np.polyfit(np.arange(fit_from, levels), np.log2(shells), 1)[0])
    result = ScanResult("", slope, table, p, k)
    tol = Config.shell_slope_tol
    if slope > tol:
        result.verdict = "diverges"
    elif slope < -tol:
        result.verdict = "converges"
    else:
        return _inconclusive(f"Shell slope {slope:.4f} within +-{tol}", result, raise_inconclusive)
    logger.debug(f"shell scan k={k} p={p}: slope {slope:.4f} -> {result.verdict}")
    return result


def threshold_verdicts(scan, threshold: float, margin: Union[float, None] = None) -> dict:
    """
    Runs `scan(p)` just below and just above a membership threshold; the
    expected verdicts are converges below and diverges above.
    """
    margin = Config.threshold_margin if margin is None else margin
    below = scan(threshold * (1 - margin))
    above = scan(threshold * (1 + margin))
    return {
        "threshold": threshold,
        "below": below,
        "above": above,
        "pass": below.verdict == "converges" and above.verdict == "diverges",
    }
