"""
Best-fit polynomials P_Q(u): the polynomial of degree k-1 whose derivative
averages over Q agree with those of u for every |alpha| <= k-1.

Polynomials are kept centered at x_Q in the scaled basis (x - x_Q)^alpha / alpha!,
which turns the moment conditions into a triangular system solved from the
top degree down using closed-form cube moments.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from ..config import Config
from ..errors import QuadratureUnderflow
from ..geometry.cubes import DyadicCube
from .fields import AnalyticField, GridField
from .multiindex import (MultiIndex, centered_cube_moment, factorial, leq, multi_indices,
                         scaled_monomial, sub)
from .quadrature import cube_gauss_nodes

logger = logging.getLogger(__name__)


@dataclass
class PolynomialK:
    center: np.ndarray
    coeffs: Dict[MultiIndex, float]

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def degree(self) -> int:
        live = [sum(a) for a, c in self.coeffs.items() if c != 0]
        return max(live) if live else 0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.derivative((0,) * self.n, x)

    def derivative(self, beta: MultiIndex, x: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(np.asarray(x, dtype=float)) - self.center
        out = np.zeros(len(y))
        for alpha, c in self.coeffs.items():
            if c != 0 and leq(beta, alpha):
                out += c * scaled_monomial(y, sub(alpha, beta))
        return out

    def as_field(self) -> AnalyticField:
        betas = [b for b in multi_indices(self.n, max((sum(a) for a in self.coeffs), default=0) + 1)
                 if sum(b) > 0]
        return AnalyticField(
            self.__call__, self.n,
            derivatives={b: (lambda b: (lambda x: self.derivative(b, x)))(b) for b in betas},
            label="polynomial")


def _as_analytic(u) -> AnalyticField:
    return u.as_analytic() if isinstance(u, GridField) else u


def cube_derivative_averages(u, lowers: np.ndarray, sides: np.ndarray, k: int,
                             cells: int = None) -> np.ndarray:
    """
    Averages of d^alpha u over each cube for |alpha| <= k-1, shaped (cubes, J),
    by 2-point Gauss rules on cells^n subcells.
    """
    cells = Config.cube_quadrature_cells if cells is None else cells
    n = lowers.shape[1]
    if cells < 2:
        raise QuadratureUnderflow(
            f"A cube needs at least 2^{n} quadrature cells, got {cells}^{n}",
            {"cells_per_axis": cells})
    u = _as_analytic(u)
    nodes = cube_gauss_nodes(lowers, sides, cells)
    flat = nodes.reshape(-1, n)
    alphas = multi_indices(n, k - 1)
    out = np.empty((len(lowers), len(alphas)))
    for j, alpha in enumerate(alphas):
        out[:, j] = u.derivative(alpha, flat).reshape(len(lowers), -1).mean(axis=1)
    return out


def solve_centered_coefficients(averages: np.ndarray, sides: np.ndarray, n: int, k: int) -> np.ndarray:
    """
    c_alpha = avg d^alpha u - sum_{beta > alpha} c_beta m(beta - alpha) / (beta - alpha)!
    with m the centered cube moment; rows are cubes, columns multi_indices(n, k-1).
    """
    alphas = multi_indices(n, k - 1)
    position = {a: j for j, a in enumerate(alphas)}
    coeffs = np.zeros_like(averages)
    for alpha in reversed(alphas):
        j = position[alpha]
        value = averages[:, j].copy()
        for beta in alphas:
            if beta != alpha and leq(alpha, beta):
                gamma = sub(beta, alpha)
                moment = np.array([centered_cube_moment(gamma, s) for s in sides]) / factorial(gamma)
                value -= coeffs[:, position[beta]] * moment
        coeffs[:, j] = value
    return coeffs


def best_fit_polynomial(u, cube: DyadicCube, k: int, cells: int = None) -> PolynomialK:
    lowers = cube.lower_f[None, :]
    sides = np.array([cube.side_f])
    averages = cube_derivative_averages(u, lowers, sides, k, cells)
    coeffs = solve_centered_coefficients(averages, sides, cube.n, k)[0]
    return PolynomialK(cube.center_f, dict(zip(multi_indices(cube.n, k - 1), coeffs.tolist())))


@dataclass
class PolynomialBatch:
    """Best-fit polynomials of many cubes at once; row i belongs to cube i."""

    centers: np.ndarray
    coeffs: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return self.centers.shape[1]

    def __len__(self):
        return len(self.centers)

    def __getitem__(self, i: int) -> PolynomialK:
        alphas = multi_indices(self.n, self.k - 1)
        return PolynomialK(self.centers[i], dict(zip(alphas, self.coeffs[i].tolist())))

    def evaluate_pairs(self, rows: np.ndarray, points: np.ndarray,
                       beta: MultiIndex = None) -> np.ndarray:
        """P_rows[i] (or its beta-derivative) at points[i]."""
        beta = beta or (0,) * self.n
        y = points - self.centers[rows]
        out = np.zeros(len(rows))
        for j, alpha in enumerate(multi_indices(self.n, self.k - 1)):
            if leq(beta, alpha):
                out += self.coeffs[rows, j] * scaled_monomial(y, sub(alpha, beta))
        return out


def best_fit_polynomials(u, cubes: Sequence[DyadicCube], k: int, cells: int = None,
                         chunk: int = 4096) -> PolynomialBatch:
    n = cubes[0].n if cubes else 0
    if not cubes:
        return PolynomialBatch(np.zeros((0, n)), np.zeros((0, 0)), k)
    lowers = np.array([c.lower_f for c in cubes])
    sides = np.array([c.side_f for c in cubes])
    parts = []
    for start in range(0, len(cubes), chunk):
        window = slice(start, start + chunk)
        averages = cube_derivative_averages(u, lowers[window], sides[window], k, cells)
        parts.append(solve_centered_coefficients(averages, sides[window], n, k))
    logger.debug(f"Best-fit polynomials of order {k} on {len(cubes)} cubes")
    return PolynomialBatch(lowers + sides[:, None] / 2, np.concatenate(parts), k)


def moment_residuals(u, cube: DyadicCube, poly: PolynomialK, k: int,
                     cells: int = None) -> Tuple[float, ...]:
    """|avg_Q d^alpha (u - P)| for each |alpha| <= k-1."""
    lowers = cube.lower_f[None, :]
    sides = np.array([cube.side_f])
    cells = Config.cube_quadrature_cells if cells is None else cells
    left = cube_derivative_averages(u, lowers, sides, k, cells)[0]
    right = cube_derivative_averages(poly.as_field(), lowers, sides, k, cells)[0]
    return tuple(float(v) for v in np.abs(left - right))
