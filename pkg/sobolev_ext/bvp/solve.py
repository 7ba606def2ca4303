import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Sequence

import numpy as np
import pandas as pd
from scipy.sparse.linalg import spsolve

from ..config import Config
from ..errors import Incompatible
from ..funcspace.fields import GridField
from ..trace.conormal import conormal_residual
from .cg import conjugate_gradient
from .fem import FemSpace, System, WeakProblem, assemble, basis_norms, gauss_points, q1_basis

logger = logging.getLogger(__name__)

COMPATIBILITY_TOL = 1e-10


@dataclass
class Solution:
    values: np.ndarray
    system: System
    field: GridField
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def _mean_zero(M: int) -> Callable[[np.ndarray], np.ndarray]:
    def project(v: np.ndarray) -> np.ndarray:
        blocks = v.reshape(-1, M)
        return (blocks - blocks.mean(axis=0)).reshape(-1)
    return project


def solve_mixed(problem: WeakProblem, tol: float = None) -> Solution:
    tol = Config.cg_tol if tol is None else tol
    system = assemble(problem)
    K_ff, rhs = system.reduced()
    project = None
    if system.compatibility is not None:
        if np.any(np.abs(system.compatibility) > COMPATIBILITY_TOL):
            raise Incompatible(
                f"Pure Neumann data has <f, 1> = {system.compatibility.tolist()}",
                {"compatibility": system.compatibility.tolist()})
        project = _mean_zero(problem.space.M)

    if problem.tensor.symmetric:
        result = conjugate_gradient(K_ff, rhs, tol=tol, project=project)
        x, iterations, residual = result.x, result.iterations, result.residual
    else:
        x = spsolve(K_ff.tocsc(), rhs)
        if project is not None:
            x = project(x)
        iterations = 0
        residual = float(np.linalg.norm(K_ff @ x - rhs) / max(np.linalg.norm(rhs), 1e-300))

    u = system.lifting.copy()
    u[system.free_dofs] = x
    norms = basis_norms(problem.space)[system.free_dofs]
    fixed = system.constrained_dofs
    diagnostics = {
        "iterations": iterations,
        "relative_residual": residual,
        "energy": float(u @ (system.K @ u)),
        "conormal_residual": conormal_residual(u, system),
        "galerkin_bound": float(10 * tol * np.linalg.norm(rhs) / np.min(norms)),
        "dirichlet_trace": float(np.max(np.abs(u[fixed]))) if len(fixed) else 0.0,
        "free_dofs": int(len(x)),
    }
    logger.info(f"Solved {problem.tensor.name} with h={problem.space.h:g}: {diagnostics}")
    return Solution(u, system, problem.space.nodal_field(u, label=problem.tensor.name), diagnostics)


def fem_errors(space: FemSpace, u: np.ndarray, exact: Callable[[np.ndarray], np.ndarray],
               exact_grad: Callable[[np.ndarray], np.ndarray]) -> Dict[str, float]:
    """L2 and gradient L2 errors of a scalar Q1 field over the active cells, 2-point Gauss."""
    n, h = space.n, space.h
    gp = gauss_points(n)
    w = h ** n / len(gp)
    phi, ref_grads = q1_basis(gp, space.offsets)
    local = np.asarray(u, dtype=float)[space.cell_nodes]
    values = np.einsum('ca,ga->cg', local, phi)
    grads = np.einsum('ca,gad->cgd', local, ref_grads) / h
    x = (space.lower + (space.cells[:, None, :] + gp[None]) * h).reshape(-1, n)
    diff = values.reshape(-1) - exact(x)
    grad_diff = grads.reshape(-1, n) - exact_grad(x)
    l2 = float(np.sqrt(w * np.sum(diff ** 2)))
    h1 = float(np.sqrt(w * np.sum(grad_diff ** 2)))
    return {"h": h, "l2": l2, "h1_semi": h1, "w12": l2 + h1}


def rate_table(rows: Sequence[Dict[str, float]], columns: Sequence[str] = ("l2", "w12")) -> pd.DataFrame:
    """Observed order log(e_i / e_{i+1}) / log(h_i / h_{i+1}) per ladder step."""
    table = pd.DataFrame(list(rows))
    for column in columns:
        ratio = table[column].shift(1) / table[column]
        table[f"{column}_rate"] = np.log(ratio) / np.log(table["h"].shift(1) / table["h"])
    return table
