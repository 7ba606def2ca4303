"""
Coefficient tensors a[i, alpha, j, beta](x) of second-order systems
    -d_alpha (a[i, alpha, j, beta] d_beta u_j) = f_i,
with i, j < M components and alpha, beta < n directions.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Sequence, Tuple, Union

import numpy as np

from ..errors import ConfigError, EllipticityFail
from ..globals import Global

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass
class CoefficientTensor:
    """`evaluator(x)` returns an array shaped (points, M, n, M, n)."""

    evaluator: Evaluator
    n: int
    M: int
    kappa: float
    bound: float
    name: str = "tensor"
    params: Dict[str, Any] = field(default_factory=dict)
    symmetric: bool = True

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(self.evaluator(x))

    def as_matrix(self, x: np.ndarray) -> np.ndarray:
        """(points, M n, M n) view with rows (i, alpha) and columns (j, beta)."""
        a = self(x)
        return a.reshape(len(a), self.M * self.n, self.M * self.n)

    def sampled_ellipticity(self, box: Tuple[Sequence[float], Sequence[float]],
                            samples: int = 1000, exclude_origin: float = 1e-6) -> float:
        """min over random (x, zeta) of Re sum a zeta conj(zeta) / |zeta|^2, zeta complex."""
        rng = Global.rng
        lower, upper = (np.asarray(b, dtype=float) for b in box)
        x = lower + (upper - lower) * rng.random((samples, self.n))
        x = x[np.linalg.norm(x, axis=1) > exclude_origin]
        size = self.M * self.n
        zeta = rng.standard_normal((len(x), size)) + 1j * rng.standard_normal((len(x), size))
        form = np.einsum('pab,pb,pa->p', self.as_matrix(x), zeta, np.conj(zeta)).real
        return float(np.min(form / np.sum(np.abs(zeta) ** 2, axis=1)))

    def check_ellipticity(self, box: Tuple[Sequence[float], Sequence[float]],
                          samples: int = 1000) -> float:
        measured = self.sampled_ellipticity(box, samples)
        if measured < self.kappa * (1 - 1e-9):
            raise EllipticityFail(
                f"{self.name}: sampled ellipticity {measured:.6g} is below kappa={self.kappa:.6g}",
                {"tensor": self.name, "measured": measured, "kappa": self.kappa})
        logger.debug(f"{self.name}: sampled ellipticity {measured:.6g} >= {self.kappa:.6g}")
        return measured

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name, **self.params}


def identity(n: int = 2, M: int = 1) -> CoefficientTensor:
    def run(x):
        eye = np.einsum('ij,ab->iajb', np.eye(M), np.eye(n))
        return np.broadcast_to(eye, (len(x),) + eye.shape)

    return CoefficientTensor(run, n, M, 1.0, 1.0, "identity")


def constant(matrix: Sequence[Sequence[float]]) -> CoefficientTensor:
    """A scalar equation with a constant, possibly nonsymmetric, n x n matrix."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"A constant tensor needs a square matrix, got shape {a.shape}",
                          {"key": "tensor"})
    n = a.shape[0]
    kappa = float(np.min(np.linalg.eigvalsh((a + a.T) / 2)))
    block = a.reshape(1, n, 1, n)

    def run(x):
        return np.broadcast_to(block, (len(x),) + block.shape)

    return CoefficientTensor(run, n, 1, kappa, float(np.max(np.abs(a))), "constant",
                             {"matrix": a.tolist()}, bool(np.allclose(a, a.T)))


def meyers(mu: float) -> CoefficientTensor:
    """I - (1 - mu^2) e e^T with e = (-x2, x1)/|x|; eigenvalues 1 and mu^2."""
    if not 0 < mu <= 1:
        raise ConfigError(f"Meyers parameter must lie in (0, 1], got {mu}", {"key": "mu"})
    s = 1 - mu ** 2

    def run(x):
        r2 = np.maximum(np.sum(x ** 2, axis=1), 1e-300)
        x1, x2 = x[:, 0], x[:, 1]
        out = np.empty((len(x), 1, 2, 1, 2))
        out[:, 0, 0, 0, 0] = 1 - s * x2 ** 2 / r2
        out[:, 0, 0, 0, 1] = s * x1 * x2 / r2
        out[:, 0, 1, 0, 0] = s * x1 * x2 / r2
        out[:, 0, 1, 0, 1] = 1 - s * x1 ** 2 / r2
        return out

    return CoefficientTensor(run, 2, 1, mu ** 2, 1.0, "meyers", {"mu": mu})


def degiorgi_constants(gamma: float, n: int) -> Tuple[float, float]:
    """(K, c): X = delta + K x x^T/|x|^2 and the coupling constant c."""
    if n < 3:
        raise ConfigError(f"The De Giorgi system needs n >= 3, got {n}", {"key": "n"})
    if not 0 < gamma < n / 2:
        raise ConfigError(f"gamma must lie in (0, n/2), got {gamma}", {"key": "gamma"})
    K = n / (n - 2)
    c = gamma * (n - gamma) * (n - 2) ** 2 / ((n - 2 * gamma) ** 2 * (n - 1) ** 2)
    return K, c


def degiorgi(gamma: float, n: int = 3) -> CoefficientTensor:
    """a[i, alpha, j, beta] = delta_ij delta_alpha,beta + c X_{i alpha} X_{j beta}; kappa = 1."""
    K, c = degiorgi_constants(gamma, n)
    eye = np.eye(n)

    def run(x):
        r2 = np.maximum(np.sum(x ** 2, axis=1), 1e-300)
        X = eye[None] + K * np.einsum('pi,pa->pia', x, x) / r2[:, None, None]
        base = np.einsum('ij,ab->iajb', eye, eye)
        return base[None] + c * np.einsum('pia,pjb->piajb', X, X)

    bound = 1 + c * (n - 1 + (1 + K) ** 2)
    return CoefficientTensor(run, n, n, 1.0, float(bound), "degiorgi",
                             {"gamma": gamma, "n": n, "c": c, "K": K})


def tensor_from_config(spec: Union[str, Dict[str, Any]], n: int = 2) -> CoefficientTensor:
    if isinstance(spec, str):
        spec = {"name": spec}
    name = str(spec.get("name", "identity")).lower()
    if name == "identity":
        return identity(int(spec.get("n", n)), int(spec.get("M", 1)))
    if name == "meyers":
        return meyers(float(spec.get("mu", 0.5)))
    if name == "degiorgi":
        return degiorgi(float(spec.get("gamma", 1.2)), int(spec.get("n", 3)))
    if name == "constant":
        if "matrix" not in spec:
            raise ConfigError("A constant tensor needs 'matrix'", {"key": "tensor"})
        return constant(spec["matrix"])
    raise ConfigError(f"Unknown tensor {name!r}", {"key": "tensor", "name": name})
