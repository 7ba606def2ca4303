"""
Manufactured solutions on the unit square for convergence studies of the
mixed solver.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
import pandas as pd

from ..errors import ConfigError
from ..geometry.boundary import BoundaryPart, NoBoundary, WholeBoundary, boundary_part_from_config
from ..geometry.domains import DomainOracle, unit_square
from .fem import WeakProblem, space_for
from .solve import Solution, fem_errors, rate_table, solve_mixed
from .tensors import CoefficientTensor, identity

logger = logging.getLogger(__name__)

Func = Callable[[np.ndarray], np.ndarray]


@dataclass
class ManufacturedCase:
    name: str
    tensor: CoefficientTensor
    oracle: DomainOracle
    dirichlet: BoundaryPart
    f: Func
    g: Union[Callable[[np.ndarray, np.ndarray], np.ndarray], None]
    exact: Union[Func, None]
    exact_grad: Union[Func, None]

    def problem(self, grid: int) -> WeakProblem:
        space = space_for(self.oracle, grid, self.dirichlet)
        return WeakProblem(self.tensor, space, self.f, self.g, self.exact)


def sine_dirichlet() -> ManufacturedCase:
    """-Laplace u = 2 pi^2 sin(pi x1) sin(pi x2), u = 0 on the whole boundary."""
    oracle = unit_square()
    pi = math.pi

    def exact(x):
        return np.sin(pi * x[:, 0]) * np.sin(pi * x[:, 1])

    def exact_grad(x):
        return pi * np.stack([np.cos(pi * x[:, 0]) * np.sin(pi * x[:, 1]),
                              np.sin(pi * x[:, 0]) * np.cos(pi * x[:, 1])], axis=1)

    return ManufacturedCase("sine-dirichlet", identity(2), oracle, WholeBoundary(oracle),
                            lambda x: 2 * pi ** 2 * exact(x), None, exact, exact_grad)


def mixed_left() -> ManufacturedCase:
    """
    u = x1^2 cos(pi x2): zero on the left edge, conormal data 2 cos(pi x2) on
    the right edge and 0 on the top and bottom edges.
    """
    oracle = unit_square()
    pi = math.pi

    def exact(x):
        return x[:, 0] ** 2 * np.cos(pi * x[:, 1])

    def exact_grad(x):
        return np.stack([2 * x[:, 0] * np.cos(pi * x[:, 1]),
                         -pi * x[:, 0] ** 2 * np.sin(pi * x[:, 1])], axis=1)

    def f(x):
        return (pi ** 2 * x[:, 0] ** 2 - 2) * np.cos(pi * x[:, 1])

    def g(x, normal):
        return np.sum(exact_grad(x) * normal, axis=1)

    return ManufacturedCase("mixed-left", identity(2), oracle, boundary_part_from_config("left", oracle),
                            f, g, exact, exact_grad)


def neumann_constant_load() -> ManufacturedCase:
    """f = 1 with no Dirichlet part: violates the compatibility condition."""
    oracle = unit_square()
    return ManufacturedCase("neumann-constant", identity(2), oracle, NoBoundary(2),
                            lambda x: np.ones(len(x)), None, None, None)


CASES = {
    "sine-dirichlet": sine_dirichlet,
    "mixed-left": mixed_left,
    "neumann-constant": neumann_constant_load,
}


def manufactured_case(name: str) -> ManufacturedCase:
    if name not in CASES:
        raise ConfigError(f"Unknown manufactured case {name!r}, available: {', '.join(CASES)}",
                          {"key": "case", "value": name})
    return CASES[name]()


def convergence_study(case: ManufacturedCase, grids: Sequence[int]) -> pd.DataFrame:
    """Errors, observed rates and solver diagnostics over a grid ladder."""
    if case.exact is None:
        raise ConfigError(f"{case.name} has no exact solution", {"key": "case"})
    rows = []
    for grid in grids:
        solution: Solution = solve_mixed(case.problem(grid))
        row = fem_errors(solution.system.space, solution.values, case.exact, case.exact_grad)
        row.update({"grid": int(grid), **solution.diagnostics})
        rows.append(row)
        logger.info(f"{case.name} grid {grid}: l2 {row['l2']:.4g}, w12 {row['w12']:.4g}")
    table = rate_table(rows, ("l2", "w12"))
    table["l2_ratio"] = table["l2"].shift(1) / table["l2"]
    return table
