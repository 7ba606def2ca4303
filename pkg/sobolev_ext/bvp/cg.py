import logging
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import sparse

from ..config import Config
from ..errors import NotConverged

logger = logging.getLogger(__name__)


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float


def conjugate_gradient(A: sparse.spmatrix, b: np.ndarray, x0: Union[np.ndarray, None] = None,
                       tol: float = None, max_iter: int = None,
                       project: Union[Callable[[np.ndarray], np.ndarray], None] = None) -> CGResult:
    """
    Conjugate gradients for a symmetric positive (semi)definite A, stopped at
    ||b - A x|| <= tol ||b||. `project` maps onto the complement of the kernel.
    """
    tol = Config.cg_tol if tol is None else tol
    max_iter = Config.cg_max_iter if max_iter is None else max_iter
    project = project or (lambda v: v)

    b = project(np.asarray(b, dtype=float))
    b_norm = np.linalg.norm(b)
    xk = np.zeros_like(b) if x0 is None else project(np.array(x0, dtype=float))
    if b_norm == 0:
        return CGResult(np.zeros_like(b), 0, 0.0)

    def true_residual(x):
        return float(np.linalg.norm(project(b - A @ x)) / b_norm)

    k = 0
    residual = true_residual(xk)
    # Recurrence drift: restart from the true residual until it meets tol
    while residual > tol and k < max_iter:
        rk = project(b - A @ xk)
        dk = rk.copy()
        rr = rk @ rk
        while np.sqrt(rr) > tol * b_norm and k < max_iter:
            Adk = A @ dk
            alpha = rr / (dk @ Adk)
            xk = xk + alpha * dk
            rk = project(rk - alpha * Adk)
            rr_next = rk @ rk
            beta = rr_next / rr
            dk = rk + beta * dk
            rr = rr_next
            k += 1
        residual = true_residual(xk)

    if residual > tol:
        raise NotConverged(k, residual)
    logger.debug(f"CG converged in {k} iterations, relative residual {residual:.3e}")
    return CGResult(xk, k, residual)
