"""
Exact derivatives of sums of terms c * x^beta * |x - x0|^mu.

d_i (x^beta r^mu) = beta_i x^(beta - e_i) r^mu + mu x^(beta + e_i) r^(mu - 2)
keeps the family closed, so every derivative of a radial power or of
x_i |x|^mu is again such a sum and evaluates without finite differences.
"""
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

from .fields import AnalyticField
from .multiindex import MultiIndex, monomial, multi_indices

Term = Tuple[MultiIndex, float]


class RadialExpression:
    def __init__(self, terms: Dict[Term, float], center: Sequence[float]):
        self.center = np.asarray(center, dtype=float)
        self.terms = {key: c for key, c in terms.items() if c != 0}

    @property
    def n(self) -> int:
        return len(self.center)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(np.asarray(x, dtype=float)) - self.center
        r = np.linalg.norm(y, axis=1)
        out = np.zeros(len(y))
        for (beta, mu), c in self.terms.items():
            out += c * monomial(y, beta) * (r ** mu if mu != 0 else 1.0)
        return out

    def partial(self, axis: int) -> "RadialExpression":
        out: Dict[Term, float] = {}
        for (beta, mu), c in self.terms.items():
            if beta[axis]:
                key = (tuple(b - (i == axis) for i, b in enumerate(beta)), mu)
                out[key] = out.get(key, 0.0) + c * beta[axis]
            if mu != 0:
                key = (tuple(b + (i == axis) for i, b in enumerate(beta)), mu - 2)
                out[key] = out.get(key, 0.0) + c * mu
        return RadialExpression(out, self.center)

    def derivative(self, alpha: MultiIndex) -> "RadialExpression":
        out = self
        for axis, power in enumerate(alpha):
            for _ in range(power):
                out = out.partial(axis)
        return out

    def plus(self, other: "RadialExpression") -> "RadialExpression":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0.0) + c
        return RadialExpression(out, self.center)


def radial_power(mu: float, center: Sequence[float]) -> RadialExpression:
    n = len(center)
    return RadialExpression({((0,) * n, float(mu)): 1.0}, center)


def coordinate_times_power(axis: int, mu: float, center: Sequence[float]) -> RadialExpression:
    """(x - x0)_axis * |x - x0|^mu"""
    n = len(center)
    beta = tuple(1 if i == axis else 0 for i in range(n))
    return RadialExpression({(beta, float(mu)): 1.0}, center)


def expressions_field(expressions: Iterable[RadialExpression], max_order: int,
                      label: str = "") -> AnalyticField:
    """Scalar field for one expression, M-vector field for M of them; exact derivatives to max_order."""
    expressions = list(expressions)
    n = expressions[0].n
    center = expressions[0].center

    def stack(exprs):
        if len(exprs) == 1:
            return exprs[0]
        return lambda x: np.stack([e(x) for e in exprs], axis=1)

    derivatives = {alpha: stack([e.derivative(alpha) for e in expressions])
                   for alpha in multi_indices(n, max_order) if sum(alpha) > 0}
    return AnalyticField(stack(expressions), n, len(expressions), derivatives,
                         singular_points=center[None, :], label=label)
