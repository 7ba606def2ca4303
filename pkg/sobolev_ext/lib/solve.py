from typing import Any, Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from ..bvp.counterexamples import counterexample
from ..bvp.fem import WeakProblem, space_for
from ..bvp.manufactured import convergence_study, manufactured_case
from ..bvp.solve import solve_mixed
from ..bvp.tensors import tensor_from_config
from ..config import Config, check_grid_ladder, parse_number_list
from ..errors import ConfigError, Incompatible
from ..funcspace.catalog import field_from_spec
from ..geometry.boundary import boundary_part_from_config
from ..geometry.factory import domain_from_config
from ..utils.data import get_named_config, read_yaml_config, resolve_domain
from ..utils.grid_dump import write_grid_dump
from ..utils.report import make_check, make_report
from .common import finish, out_path

L2_RATIO = 3.5
LIST_PARAMS = {"grids": int, "p_values": float, "levels": int, "eps_ladder": float}


def conormal_bound() -> float:
    return 10 * Config.cg_tol


def load_problem(problem: Union[str, Dict[str, Any]]) -> Dict[str, Any]:
    """A mapping, a problem name from the data directory or a YAML path."""
    if isinstance(problem, dict):
        return problem
    cfg = get_named_config("problems", problem)
    if cfg is None:
        cfg = read_yaml_config(problem)
    if cfg is None:
        raise ConfigError(f"Problem {problem!r} not found", {"key": "problem", "value": problem})
    return cfg


def _density(spec: Any, n: int):
    if spec is None:
        return None
    if isinstance(spec, (int, float)):
        value = float(spec)
        return lambda x: np.full(len(x), value)
    return field_from_spec(spec, n).value


def _conormal_density(spec: Any):
    if spec is None:
        return None
    value = float(spec)
    return lambda x, normal: np.full(len(x), value)


def problem_study(cfg: Dict[str, Any], grids: Sequence[int]) -> pd.DataFrame:
    oracle = domain_from_config(resolve_domain(cfg.get("domain", "square")))
    tensor = tensor_from_config(cfg.get("tensor", "identity"), oracle.n)
    dirichlet = boundary_part_from_config(cfg.get("dirichlet"), oracle)
    f = _density(cfg.get("f"), oracle.n)
    g = _conormal_density(cfg.get("g"))
    rows = []
    solution = None
    for grid in grids:
        space = space_for(oracle, grid, dirichlet, tensor.M, offset=float(cfg.get("offset", 0.0)))
        solution = solve_mixed(WeakProblem(tensor, space, f, g))
        rows.append({"grid": grid, "h": space.h, **solution.diagnostics})
    path = write_grid_dump(out_path(f"solve_{grids[-1]}.grid"), solution.field)
    print(f"Wrote {path}")
    return pd.DataFrame(rows)


def solver_checks(table: pd.DataFrame) -> List[Dict[str, Any]]:
    residual = float(table["conormal_residual"].max())
    return [make_check("conormal residual within ten times the solver tolerance", residual,
                       conormal_bound(), residual <= conormal_bound())]


def run_solve(case: str = "mixed-left", grids: Union[str, Sequence[int], None] = None,
              problem: Union[str, Dict[str, Any], None] = None) -> Dict[str, Any]:
    grids = parse_number_list(grids, int) if grids is not None else list(Config.grids)
    check_grid_ladder(grids)

    if problem is not None:
        cfg = load_problem(problem)
        name = str(cfg.get("name", problem if isinstance(problem, str) else "problem"))
        print(f"Solving problem {name} on grids {grids}...")
        table = problem_study(cfg, grids)
        report = make_report("solve", solver_checks(table), problem=name, grids=grids)
        return finish(report, {"diagnostics": table}, name="solve")

    mc = manufactured_case(case)
    print(f"Solving manufactured case {mc.name} on grids {grids}...")
    if mc.exact is None:
        try:
            solve_mixed(mc.problem(grids[0]))
        except Incompatible as e:
            check = make_check("incompatible Neumann data is rejected", e.details, None, True)
        else:
            check = make_check("incompatible Neumann data is rejected", None, None, False)
        return finish(make_report("solve", [check], case=mc.name, grids=grids[:1]),
                      name=f"solve_{mc.name}")

    table = convergence_study(mc, grids)
    checks = solver_checks(table)
    ratios = table["l2_ratio"].to_numpy()[1:]
    if len(ratios):
        checks.append(make_check(f"L2 error ratio at least {L2_RATIO:g} per halving",
                                 ratios.tolist(), L2_RATIO, bool(np.all(ratios >= L2_RATIO))))
    report = make_report("solve", checks, case=mc.name, grids=grids)
    return finish(report, {"convergence": table}, name=f"solve_{mc.name}")


def run_counterexample(case: str = "meyers", **params: Any) -> Dict[str, Any]:
    for key, cast in LIST_PARAMS.items():
        if key in params and params[key] is not None:
            params[key] = parse_number_list(params[key], cast)
    print(f"Running the {case} counterexample with {params or 'defaults'}...")
    result = counterexample(case, **params)
    return finish(result.to_report(), result.tables, name=f"counterexample_{case.lower()}")
