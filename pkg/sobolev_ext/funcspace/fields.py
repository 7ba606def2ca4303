import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..config import Config
from .multiindex import MultiIndex, factorial, monomial, sub, leq

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass
class AnalyticField:
    """
    A function given by an evaluator over (m, n) point arrays, with optional
    exact derivative evaluators per multi-index. Missing derivatives fall back
    to second-order central differences and the field is flagged.
    """

    func: Evaluator
    n: int
    components: int = 1
    derivatives: Dict[MultiIndex, Evaluator] = field(default_factory=dict)
    singular_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    label: str = ""

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.value(x)

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.atleast_2d(np.asarray(x, dtype=float))), dtype=float)

    def has_exact(self, alpha: MultiIndex) -> bool:
        return sum(alpha) == 0 or tuple(alpha) in self.derivatives

    def uses_finite_differences(self, max_order: int) -> bool:
        from .multiindex import multi_indices
        return any(not self.has_exact(a) for a in multi_indices(self.n, max_order))

    def derivative(self, alpha: MultiIndex, x: np.ndarray) -> np.ndarray:
        alpha = tuple(alpha)
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if sum(alpha) == 0:
            return self.value(x)
        if alpha in self.derivatives:
            return np.asarray(self.derivatives[alpha](x), dtype=float)
        return self._finite_difference(alpha, x)

    def _finite_difference(self, alpha: MultiIndex, x: np.ndarray) -> np.ndarray:
        step = Config.fd_step * 10.0 ** (sum(alpha) - 1)
        axis = next(i for i, a in enumerate(alpha) if a > 0)
        lower = tuple(a - (1 if i == axis else 0) for i, a in enumerate(alpha))
        shift = np.zeros(self.n)
        shift[axis] = step
        return (self.derivative(lower, x + shift) - self.derivative(lower, x - shift)) / (2 * step)

    def scaled(self, factor: float) -> "AnalyticField":
        return AnalyticField(
            lambda x: factor * self.func(x), self.n, self.components,
            {a: (lambda d: (lambda x: factor * d(x)))(d) for a, d in self.derivatives.items()},
            self.singular_points, f"{factor:g}*{self.label}")

    def plus(self, other: "AnalyticField") -> "AnalyticField":
        keys = set(self.derivatives) & set(other.derivatives)
        return AnalyticField(
            lambda x: self.func(x) + other.func(x), self.n, self.components,
            {a: (lambda a: (lambda x: self.derivatives[a](x) + other.derivatives[a](x)))(a)
             for a in keys},
            _stack_points(self.singular_points, other.singular_points),
            f"{self.label}+{other.label}")


def _stack_points(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    parts = [p for p in (a, b) if p.size]
    return np.vstack(parts) if parts else np.zeros((0, 0))


def constant_field(value: float, n: int = 2) -> AnalyticField:
    return AnalyticField(lambda x: np.full(len(x), float(value)), n, label=f"const:{value:g}")


def zero_field(n: int = 2) -> AnalyticField:
    return constant_field(0.0, n)


def polynomial_field(coefficients: Dict[MultiIndex, float], n: int, max_order: int = 4) -> AnalyticField:
    """sum_alpha c_alpha x^alpha with exact derivatives up to max_order."""
    coefficients = {tuple(a): float(c) for a, c in coefficients.items()}

    def evaluator(beta: MultiIndex) -> Evaluator:
        def run(x: np.ndarray) -> np.ndarray:
            out = np.zeros(len(x))
            for alpha, c in coefficients.items():
                if leq(beta, alpha):
                    scale = factorial(alpha) / factorial(sub(alpha, beta))
                    out += c * scale * monomial(x, sub(alpha, beta))
            return out
        return run

    from .multiindex import multi_indices
    derivatives = {beta: evaluator(beta) for beta in multi_indices(n, max_order) if sum(beta) > 0}
    return AnalyticField(evaluator((0,) * n), n, derivatives=derivatives, label="polynomial")


def masked_field(base: AnalyticField, keep: Callable[[np.ndarray], np.ndarray], label: str = "") -> AnalyticField:
    """base where keep(x) holds, 0 elsewhere, derivatives likewise."""
    def wrap(f: Evaluator) -> Evaluator:
        def run(x: np.ndarray) -> np.ndarray:
            x = np.atleast_2d(x)
            mask = keep(x)
            out = np.zeros((len(x),) + ((base.components,) if base.components > 1 else ()))
            if np.any(mask):
                out[mask] = f(x[mask])
            return out
        return run

    return AnalyticField(wrap(base.func), base.n, base.components,
                         {a: wrap(d) for a, d in base.derivatives.items()},
                         base.singular_points, label or f"masked:{base.label}")


@dataclass
class GridField:
    """
    Cell-centered samples on a uniform lattice: cell i has center
    origin + (i + 1/2) h. Vector fields carry a trailing component axis.
    """

    origin: np.ndarray
    h: float
    values: np.ndarray
    components: int = 1
    mask: Union[np.ndarray, None] = None
    label: str = ""

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"GridField {self.label!r} holds non-finite values")
        expected = self.n + (1 if self.components > 1 else 0)
        if self.values.ndim != expected:
            raise ValueError(
                f"GridField values have {self.values.ndim} axes, expected {expected}")
        if self.mask is not None and self.mask.shape != self.dims:
            raise ValueError("GridField mask does not match the lattice")

    @property
    def n(self) -> int:
        return len(self.origin)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(self.values.shape[:self.n])

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.h * np.array(self.dims)

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    def axes(self) -> Sequence[np.ndarray]:
        return [self.origin[i] + (np.arange(d) + 0.5) * self.h for i, d in enumerate(self.dims)]

    def points(self) -> np.ndarray:
        return lattice_points(self.origin, self.h, self.dims)

    def flat_values(self) -> np.ndarray:
        if self.components > 1:
            return self.values.reshape(-1, self.components)
        return self.values.reshape(-1)

    def derivative(self, alpha: MultiIndex) -> np.ndarray:
        """Central differences (one-sided second order at the lattice edge)."""
        out = self.values
        for axis, power in enumerate(alpha):
            for _ in range(power):
                out = np.gradient(out, self.h, axis=axis, edge_order=2)
        return out

    def interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator(tuple(self.axes()), self.values, method="linear",
                                       bounds_error=False, fill_value=None)

    def as_analytic(self) -> AnalyticField:
        interp = self.interpolator()
        return AnalyticField(lambda x: interp(np.atleast_2d(x)), self.n, self.components,
                             label=f"grid:{self.label}")

    def with_values(self, values: np.ndarray, label: str = "") -> "GridField":
        return GridField(self.origin, self.h, values, self.components, self.mask, label or self.label)


def lattice_dims(lower: Sequence[float], upper: Sequence[float], h: float) -> Tuple[int, ...]:
    spans = (np.asarray(upper, dtype=float) - np.asarray(lower, dtype=float)) / h
    dims = np.rint(spans).astype(int)
    if np.any(np.abs(spans - dims) > 1e-9 * np.maximum(1.0, spans)) or np.any(dims < 1):
        raise ValueError(f"Box {list(lower)}..{list(upper)} is not a whole number of cells of size {h}")
    return tuple(int(d) for d in dims)


def lattice_points(origin: np.ndarray, h: float, dims: Sequence[int]) -> np.ndarray:
    axes = [origin[i] + (np.arange(d) + 0.5) * h for i, d in enumerate(dims)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def sample_grid(field: AnalyticField, lower: Sequence[float], upper: Sequence[float], h: float,
                label: str = "") -> GridField:
    lower = np.asarray(lower, dtype=float)
    dims = lattice_dims(lower, upper, h)
    values = field.value(lattice_points(lower, h, dims))
    shape = dims + ((field.components,) if field.components > 1 else ())
    return GridField(lower, h, values.reshape(shape), field.components, label=label or field.label)
