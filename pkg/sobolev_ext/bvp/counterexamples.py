"""
Explicit elliptic operators whose solutions belong to W^{m,p} only for p below
a threshold close to 2: the Meyers scalar tensor in the plane, the De Giorgi
system in n >= 3 dimensions and the higher-order Mazya operators. Each case
checks that its field solves the equation away from the singularity and that
norm scans split exactly at the closed-form threshold.
"""
import logging
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..config import Config
from ..errors import ConfigError
from ..funcspace.fields import AnalyticField
from ..funcspace.multiindex import unit
from ..funcspace.quadrature import gauss_legendre
from ..funcspace.radial import RadialExpression, coordinate_times_power, expressions_field, radial_power
from ..funcspace.scan import singular_norm_scan, sobolev_norm_scan, threshold_verdicts
from ..geometry.boundary import WholeBoundary
from ..geometry.domains import BallDomain, polygonal_disc
from ..utils.report import make_check, make_report
from ..utils.sample_evenly import sample_evenly_indices
from .fem import WeakProblem, space_for
from .solve import fem_errors, rate_table, solve_mixed
from .tensors import CoefficientTensor, degiorgi, degiorgi_constants, meyers

logger = logging.getLogger(__name__)

WEAK_RESIDUAL_TOL = 1e-6


@dataclass
class CounterexampleReport:
    case: str
    params: Dict[str, Any]
    threshold: float
    checks: List[Dict[str, Any]] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check["pass"] for check in self.checks)

    def to_report(self) -> Dict[str, Any]:
        return make_report("counterexample", self.checks, case=self.case, params=self.params,
                           threshold=self.threshold)


# Weak residuals against hat test functions

def hat_rule(n: int, h: float, pieces: int = 4, nodes: int = 4):
    """
    Composite Gauss rule on [-h, h]^n, split at 0 so the hat is smooth on every
    piece. Returns offsets, weights, hat values and hat gradients.
    """
    edges = np.linspace(-h, h, 2 * pieces + 1)
    t, w = zip(*(gauss_legendre(a, b, nodes) for a, b in zip(edges, edges[1:])))
    t, w = np.concatenate(t), np.concatenate(w)
    T = np.array(list(product(t, repeat=n)))
    W = np.prod(np.array(list(product(w, repeat=n))), axis=1)
    F = 1 - np.abs(T) / h
    phi = np.prod(F, axis=1)
    dphi = np.empty_like(T)
    for d in range(n):
        dphi[:, d] = -np.sign(T[:, d]) / h * np.prod(np.delete(F, d, axis=1), axis=1)
    return T, W, phi, dphi


def annulus_centers(n: int, h: float, r_in: float, r_out: float, max_centers: int = 24) -> np.ndarray:
    """Lattice points h Z^n whose hat support lies in r_in <= |x| <= r_out."""
    ticks = np.arange(-math.floor(r_out / h), math.floor(r_out / h) + 1) * h
    points = np.array(list(product(ticks, repeat=n)))
    r = np.linalg.norm(points, axis=1)
    reach = h * math.sqrt(n)
    points = points[(r - reach >= r_in) & (r + reach <= r_out)]
    return points[sample_evenly_indices(len(points), max_centers)]


def weak_residual(tensor: CoefficientTensor, u: AnalyticField, centers: np.ndarray, h: float,
                  f: Union[Callable[[np.ndarray], np.ndarray], None] = None,
                  pieces: int = 4, nodes: int = 4) -> np.ndarray:
    """
    int a d_beta u_j d_alpha phi + int f_i phi for every hat phi centered at
    `centers` and every component i, shaped (centers, M). It vanishes when
    div(a grad u) = f on the hat supports.
    """
    n, M = tensor.n, tensor.M
    T, W, phi, dphi = hat_rule(n, h, pieces, nodes)
    out = np.empty((len(centers), M))
    for c, center in enumerate(np.asarray(centers, dtype=float)):
        X = center + T
        G = np.stack([u.derivative(unit(n, beta), X).reshape(len(X), M) for beta in range(n)], axis=2)
        flux = np.einsum('qiajb,qjb->qia', tensor(X), G)
        out[c] = np.einsum('q,qia,qa->i', W, flux, dphi)
        if f is not None:
            out[c] += np.einsum('q,qi,q->i', W, np.asarray(f(X)).reshape(len(X), M), phi)
    return out


# Membership scans

def expected_verdict(p: float, threshold: float, margin: float) -> Union[str, None]:
    if p <= threshold * (1 - margin):
        return "converges"
    if p >= threshold * (1 + margin):
        return "diverges"
    return None


def shell_verdicts(u: AnalyticField, k: int, p_values: Sequence[float], threshold: float,
                   levels: Sequence[int], radius: float = 1.0) -> pd.DataFrame:
    """Shell scans for every (p, levels) pair, with the verdict the threshold predicts."""
    margin = Config.threshold_margin
    rows = []
    for p in p_values:
        for depth in levels:
            scan = singular_norm_scan(u, np.zeros(u.n), k, p, radius=radius, levels=depth,
                                      raise_inconclusive=False)
            rows.append({"p": float(p), "levels": int(depth), "slope": scan.slope,
                         "verdict": scan.verdict, "expected": expected_verdict(p, threshold, margin)})
    return pd.DataFrame(rows)


def scan_checks(u: AnalyticField, k: int, p_values: Sequence[float], threshold: float,
                levels: Sequence[int], label: str) -> Tuple[List[Dict[str, Any]], Dict[str, pd.DataFrame]]:
    checks, tables = [], {}
    levels = list(levels)

    if math.isfinite(threshold):
        split = threshold_verdicts(
            lambda p: singular_norm_scan(u, np.zeros(u.n), k, p, levels=levels[-1],
                                         raise_inconclusive=False),
            threshold)
        checks.append(make_check(
            f"{label}: W^{{{k},p}} membership splits at p = {threshold:.6g}",
            {"below": split["below"].verdict, "above": split["above"].verdict,
             "slope_below": split["below"].slope, "slope_above": split["above"].slope},
            Config.threshold_margin, split["pass"]))

    table = shell_verdicts(u, k, p_values, threshold, levels)
    tables["shell_scans"] = table
    decided = table[table["expected"].notna()]
    for p, group in decided.groupby("p"):
        finest = group[group["levels"] == max(levels)].iloc[0]
        checks.append(make_check(
            f"{label}: p = {p:g} {finest['expected']}",
            {"verdict": finest["verdict"], "slope": finest["slope"]},
            Config.shell_slope_tol, finest["verdict"] == finest["expected"]))
    if len(levels) >= 2:
        finest_two = table[table["levels"].isin(sorted(levels)[-2:])]
        stable = bool(finest_two.groupby("p")["verdict"].nunique().le(1).all())
        checks.append(make_check(f"{label}: verdicts agree across the two finest shell depths",
                                 finest_two[["p", "levels", "verdict"]].to_dict(orient="list"),
                                 None, stable))
    return checks, tables


def default_levels() -> List[int]:
    return [Config.shell_levels, Config.shell_levels + 2]


# Meyers

def meyers_threshold(mu: float) -> float:
    return math.inf if mu >= 1 else 2 / (1 - mu)


def meyers_field(mu: float) -> AnalyticField:
    """x1 |x|^(mu - 1), which solves div(a grad u) = 0 off the origin."""
    return expressions_field([coordinate_times_power(0, mu - 1, (0.0, 0.0))], 1, f"meyers(mu={mu:g})")


def meyers_case(mu: float, grids: Sequence[int] = None, p_values: Sequence[float] = None,
                levels: Sequence[int] = None, solve: bool = True) -> CounterexampleReport:
    tensor = meyers(mu)
    grids = list(grids or Config.grids)
    threshold = meyers_threshold(mu)
    if p_values is None:
        p_values = [3.0, 6.0] if mu == 0.5 else [2.0, 4.0]
    levels = list(levels or default_levels())
    u = meyers_field(mu)
    report = CounterexampleReport("meyers", {"mu": mu, "grids": grids, "p_values": list(p_values)},
                                  threshold)
    print(f"Meyers case mu={mu:g}: threshold {threshold:.6g}")

    disc = polygonal_disc(1.0, 256)
    kappa = tensor.sampled_ellipticity(disc.bbox)
    report.checks.append(make_check("sampled ellipticity >= mu^2", kappa, tensor.kappa,
                                    kappa >= tensor.kappa * (1 - 1e-9)))

    h = 1.0 / 16
    residual = weak_residual(tensor, u, annulus_centers(2, h, 0.3, 0.8), h)
    worst = float(np.max(np.abs(residual)))
    report.checks.append(make_check("exact field solves the equation against hats off the origin",
                                    worst, WEAK_RESIDUAL_TOL, worst <= WEAK_RESIDUAL_TOL))

    checks, tables = scan_checks(u, 1, p_values, threshold, levels, "meyers")
    report.checks.extend(checks)
    report.tables.update(tables)

    grid_rows = []
    for p in (p_values if len(grids) >= 3 else []):
        scan = sobolev_norm_scan(u, disc, 1, p, grids, raise_inconclusive=False)
        grid_rows.append({"p": p, "slope": scan.slope, "verdict": scan.verdict})
    report.tables["grid_scans"] = pd.DataFrame(grid_rows)

    if solve:
        rows = galerkin_errors(tensor, u, disc, grids)
        report.tables["galerkin"] = rows
        errors = rows["w12"].to_numpy()
        report.checks.append(make_check("Galerkin W^{1,2} error decreases under refinement",
                                        errors.tolist(), None, bool(np.all(np.diff(errors) < 0))))
        report.checks.append(make_check("conormal residual <= 10x solver tolerance",
                                        float(rows["conormal_residual"].max()), 10 * Config.cg_tol,
                                        bool(rows["conormal_residual"].max() <= 10 * Config.cg_tol)))
    return report


def galerkin_errors(tensor: CoefficientTensor, u: AnalyticField, oracle, grids: Sequence[int]) -> pd.DataFrame:
    """Q1 solves with Dirichlet data from `u` on the whole boundary; grids offset by h/2 off the origin."""
    def exact(x):
        return u(x).reshape(-1)

    def exact_grad(x):
        return np.stack([u.derivative(unit(u.n, d), x).reshape(-1) for d in range(u.n)], axis=1)

    rows = []
    for grid in grids:
        space = space_for(oracle, grid, WholeBoundary(oracle), offset=0.5)
        solution = solve_mixed(WeakProblem(tensor, space, lifting=exact))
        row = fem_errors(space, solution.values, exact, exact_grad)
        row.update({"grid": int(grid), "iterations": solution.diagnostics["iterations"],
                    "conormal_residual": solution.diagnostics["conormal_residual"]})
        rows.append(row)
        logger.info(f"Galerkin grid {grid}: {row}")
    return rate_table(rows, ("l2", "w12"))


# De Giorgi

def degiorgi_field(gamma: float, n: int = 3) -> AnalyticField:
    """x |x|^-gamma - x, component by component."""
    center = (0.0,) * n
    exprs = []
    for i in range(n):
        e = unit(n, i)
        exprs.append(RadialExpression({(e, -float(gamma)): 1.0, (e, 0.0): -1.0}, center))
    return expressions_field(exprs, 1, f"degiorgi(gamma={gamma:g})")


def degiorgi_rhs(gamma: float, n: int = 3) -> Callable[[np.ndarray], np.ndarray]:
    """f_i = -sum_alpha d_alpha a[i, alpha, j, j] = -c K (n + K)(n - 1) x_i / |x|^2."""
    K, c = degiorgi_constants(gamma, n)
    scale = c * K * (n + K) * (n - 1)

    def f(x):
        r2 = np.maximum(np.sum(x ** 2, axis=1, keepdims=True), 1e-300)
        return -scale * x / r2

    return f


def degiorgi_case(gamma: float, n: int = 3, grids: Sequence[int] = (8, 16, 32),
                  p_values: Sequence[float] = None, levels: Sequence[int] = None) -> CounterexampleReport:
    tensor = degiorgi(gamma, n)
    grids = list(grids)
    threshold = n / gamma
    if p_values is None:
        p_values = [2.0, 3.0]
    levels = list(levels or default_levels())
    u = degiorgi_field(gamma, n)
    report = CounterexampleReport("degiorgi", {"gamma": gamma, "n": n, "grids": grids,
                                               "p_values": list(p_values)}, threshold)
    print(f"De Giorgi case gamma={gamma:g}, n={n}: threshold {threshold:.6g}")

    ball = BallDomain((0.0,) * n, 1.0)
    kappa = tensor.sampled_ellipticity(ball.bbox)
    report.checks.append(make_check("sampled ellipticity >= 1", kappa, 1.0, kappa >= 1 - 1e-9))

    h = 0.1
    residual = weak_residual(tensor, u, annulus_centers(n, h, 0.3, 0.8), h,
                             f=degiorgi_rhs(gamma, n), pieces=3)
    worst = float(np.max(np.abs(residual)))
    report.checks.append(make_check("weak identity against smooth test fields off the origin",
                                    worst, WEAK_RESIDUAL_TOL, worst <= WEAK_RESIDUAL_TOL))

    checks, tables = scan_checks(u, 1, p_values, threshold, levels, "degiorgi")
    report.checks.extend(checks)
    report.tables.update(tables)

    grid_rows = []
    for p in (p_values if len(grids) >= 3 else []):
        scan = sobolev_norm_scan(u, ball, 1, p, grids, raise_inconclusive=False)
        grid_rows.append({"p": p, "slope": scan.slope, "verdict": scan.verdict})
        if p >= threshold * (1 + Config.threshold_margin):
            report.checks.append(make_check(f"degiorgi: grid scan at p = {p:g} diverges",
                                            scan.slope, Config.scan_diverge_slope,
                                            scan.verdict == "diverges"))
        elif p <= threshold * (1 - Config.threshold_margin):
            report.checks.append(make_check(f"degiorgi: grid scan at p = {p:g} does not diverge",
                                            scan.slope, Config.scan_diverge_slope,
                                            scan.verdict != "diverges"))
    report.tables["grid_scans"] = pd.DataFrame(grid_rows)
    return report


# Mazya

def strongly_elliptic(a: float, b: float, c: float) -> bool:
    return a > 0 and c > 0 and b ** 2 < a * c


def theta_general(a: float, b: float, c: float, n: int) -> float:
    """Exponent of the fourth-order Mazya operator with coefficients (a, b, c)."""
    disc = n ** 2 / 4 - (n - 1) * (b * n + c) / (a + 2 * b + c)
    if disc < 0:
        raise ConfigError(f"No real exponent for (a, b, c) = ({a}, {b}, {c}), n = {n}",
                          {"a": a, "b": b, "c": c, "n": n})
    return 2 - n / 2 + math.sqrt(disc)


def mazya_coefficients(eps: float, n: int, odd: bool = False) -> Tuple[float, float, float]:
    if odd:
        return (n - 4) ** 2 + eps, (n - 4) * (n + 2), (n + 2) ** 2
    return (n - 2) ** 2 + eps, n * (n - 2), n ** 2


def mazya_theta(eps: float, n: int) -> float:
    return 2 - n / 2 + n * math.sqrt(eps) / (2 * math.sqrt(4 * (n - 1) ** 2 + eps))


def mazya_mu(eps: float, n: int) -> float:
    return 3 - n / 2 + (n + 2) * (n - 4) / 2 * math.sqrt(eps / (4 * (n - 1) ** 2 + eps))


def _check_mazya(eps: float, m: int, n: int):
    if eps <= 0:
        raise ConfigError(f"epsilon must be positive, got {eps}", {"key": "epsilon"})
    if m < 2:
        raise ConfigError(f"The Mazya operators need m >= 2, got {m}", {"key": "m"})
    if n < 2:
        raise ConfigError(f"The Mazya operators need n >= 2, got {n}", {"key": "n"})
    if m % 2 and n <= 4:
        raise ConfigError(f"The odd-order Mazya field needs n >= 5, got {n}", {"key": "n"})


def mazya_exponent(eps: float, m: int, n: int) -> Tuple[float, float]:
    """(power of |x| in v, membership threshold in p) for the branch given by the parity of m."""
    _check_mazya(eps, m, n)
    if m % 2:
        mu = mazya_mu(eps, n)
        return mu + m - 3, n / (3 - mu)
    theta = mazya_theta(eps, n)
    return theta + m - 2, n / (2 - theta)


def mazya_threshold(eps: float, m: int, n: int) -> float:
    return mazya_exponent(eps, m, n)[1]


def mazya_field(eps: float, m: int, n: int) -> AnalyticField:
    power, _ = mazya_exponent(eps, m, n)
    return expressions_field([radial_power(power, (0.0,) * n)], m, f"mazya(eps={eps:g}, m={m}, n={n})")


def mazya_scan(eps: float, m: int = 2, n: int = 4, p_values: Sequence[float] = None,
               levels: Sequence[int] = None,
               eps_ladder: Sequence[float] = (1.0, 0.1, 0.01)) -> CounterexampleReport:
    """
    Shell scans only: the order-2m operator has no solver here, and the
    verdict is decided by the point singularity at the origin.
    """
    power, threshold = mazya_exponent(eps, m, n)
    odd = bool(m % 2)
    levels = list(levels or default_levels())
    if p_values is None:
        p_values = [2.0, round(threshold * 1.25, 6)]
    report = CounterexampleReport("mazya", {"epsilon": eps, "m": m, "n": n, "odd": odd,
                                            "power": power, "p_values": list(p_values)}, threshold)
    print(f"Mazya case eps={eps:g}, m={m}, n={n}: threshold {threshold:.6g}")

    a, b, c = mazya_coefficients(eps, n, odd)
    report.checks.append(make_check("coefficients are strongly elliptic", {"a": a, "b": b, "c": c},
                                    None, strongly_elliptic(a, b, c)))
    if not odd:
        general = theta_general(a, b, c, n)
        closed = mazya_theta(eps, n)
        report.checks.append(make_check("general exponent reproduces the closed form",
                                        abs(general - closed), 1e-12, abs(general - closed) <= 1e-12))

    checks, tables = scan_checks(mazya_field(eps, m, n), m, p_values, threshold, levels, "mazya")
    report.checks.extend(checks)
    report.tables.update(tables)

    ladder = pd.DataFrame({"epsilon": list(eps_ladder),
                           "threshold": [mazya_threshold(e, m, n) for e in eps_ladder]})
    report.tables["threshold_ladder"] = ladder
    values = ladder.sort_values("epsilon", ascending=False)["threshold"].to_numpy()
    report.checks.append(make_check("thresholds decrease towards 2 as epsilon decreases",
                                    values.tolist(), None,
                                    bool(np.all(np.diff(values) < 0) and np.all(values > 2))))
    limit = mazya_threshold(1e-14, m, n)
    report.checks.append(make_check("threshold limit as epsilon -> 0", limit, 1e-5, abs(limit - 2) <= 1e-5))
    return report


def counterexample(case: str, **params: Any) -> CounterexampleReport:
    case = case.lower()
    if case == "meyers":
        return meyers_case(float(params.pop("mu", 0.5)), **params)
    if case == "degiorgi":
        return degiorgi_case(float(params.pop("gamma", 1.2)), **params)
    if case == "mazya":
        return mazya_scan(float(params.pop("epsilon", 1.0)), **params)
    raise ConfigError(f"Unknown counterexample {case!r}, expected meyers, degiorgi or mazya",
                      {"key": "case", "value": case})
