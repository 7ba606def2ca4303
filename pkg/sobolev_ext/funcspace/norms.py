import logging
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..geometry.domains import DomainOracle
from .fields import AnalyticField, GridField
from .multiindex import MultiIndex, multi_indices
from .quadrature import QuadratureRule, domain_quadrature

logger = logging.getLogger(__name__)

Field = Union[AnalyticField, GridField]
Box = Tuple[Sequence[float], Sequence[float]]

# Points per derivative evaluation batch
EVAL_CHUNK = 1 << 19


def _magnitude(values: np.ndarray) -> np.ndarray:
    return np.linalg.norm(values, axis=-1) if values.ndim > 1 else np.abs(values)


def _check_exponent(p: float) -> None:
    if not 1 <= p < np.inf:
        raise ValueError(f"p must satisfy 1 <= p < inf, got {p}")


def analytic_terms(u: AnalyticField, rule: QuadratureRule, k: int, p: float) -> Dict[MultiIndex, float]:
    terms = {}
    for alpha in multi_indices(u.n, k):
        total = 0.0
        for start in range(0, len(rule), EVAL_CHUNK):
            window = slice(start, start + EVAL_CHUNK)
            values = _magnitude(u.derivative(alpha, rule.points[window]))
            total += float(np.dot(rule.weights[window], values ** p))
        terms[alpha] = total ** (1.0 / p)
    return terms


def grid_terms(u: GridField, mask: np.ndarray, k: int, p: float) -> Dict[MultiIndex, float]:
    terms = {}
    for alpha in multi_indices(u.n, k):
        values = _magnitude(u.derivative(alpha))
        terms[alpha] = float(np.sum(values[mask] ** p) * u.cell_volume) ** (1.0 / p)
    return terms


def grid_mask(u: GridField, oracle: Union[DomainOracle, None]) -> np.ndarray:
    """Cells entering a grid norm: centers inside the oracle, else the field mask, else all."""
    if oracle is not None:
        return oracle.contains(u.points()).reshape(u.dims)
    if u.mask is not None:
        return u.mask
    return np.ones(u.dims, dtype=bool)


def sobolev_terms(u: Field, oracle: Union[DomainOracle, None], k: int, p: float,
                  grid: int = 64, box: Union[Box, None] = None,
                  rule: Union[QuadratureRule, None] = None) -> Dict[MultiIndex, float]:
    """(int_Omega |d^alpha u|^p)^(1/p) for every |alpha| <= k."""
    _check_exponent(p)
    if isinstance(u, GridField):
        return grid_terms(u, grid_mask(u, oracle), k, p)
    if rule is None:
        rule = domain_quadrature(oracle, grid, box, singular_points=u.singular_points)
    return analytic_terms(u, rule, k, p)


def sobolev_norm(u: Field, oracle: Union[DomainOracle, None], k: int, p: float,
                 grid: int = 64, box: Union[Box, None] = None,
                 rule: Union[QuadratureRule, None] = None) -> float:
    """Sum over |alpha| <= k of the L^p norms of d^alpha u over the domain."""
    return float(sum(sobolev_terms(u, oracle, k, p, grid, box, rule).values()))


def order_seminorms(u: Field, oracle: Union[DomainOracle, None], k: int, p: float,
                    grid: int = 64, box: Union[Box, None] = None) -> List[float]:
    """Entry j sums the L^p norms of d^alpha u with |alpha| = j."""
    terms = sobolev_terms(u, oracle, k, p, grid, box)
    out = [0.0] * (k + 1)
    for alpha, value in terms.items():
        out[sum(alpha)] += value
    return out


def sobolev_norm_refinement(u: AnalyticField, oracle: DomainOracle, k: int, p: float,
                            grid: int = 32, box: Union[Box, None] = None) -> Dict[str, float]:
    """Norm at h and h/2 with the finite-difference flag."""
    coarse = sobolev_norm(u, oracle, k, p, grid, box)
    fine = sobolev_norm(u, oracle, k, p, 2 * grid, box)
    lower, upper = box if box is not None else oracle.bbox
    h = float(np.max(np.asarray(upper) - np.asarray(lower))) / grid
    return {
        "h": h,
        "value_h": coarse,
        "value_h2": fine,
        "relative_change": abs(fine - coarse) / max(abs(fine), 1e-300),
        "finite_differences": bool(u.uses_finite_differences(k)),
    }
