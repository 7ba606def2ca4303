import math
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from ..config import Config, check_grid_ladder, parse_number_list
from ..errors import ConfigError
from ..extension.jones import extension_norm_ratio, jones_extend, support_diagnostics
from ..extension.localized import Patch, build_localized_plan, localized_extend
from ..extension.plan import ExtensionPlan, build_extension_plan, default_j_max
from ..extension.zero import extend_by_zero
from ..funcspace.catalog import FieldSpec, field_from_spec
from ..funcspace.fields import AnalyticField, polynomial_field
from ..funcspace.multiindex import multi_indices
from ..geometry.boundary import boundary_part_from_config
from ..geometry.cubes import RootBox
from ..geometry.domains import DomainOracle
from ..geometry.factory import DomainSpec, domain_from_config, root_for
from ..globals import Global
from ..utils.data import resolve_domain
from ..utils.grid_dump import write_grid_dump
from ..utils.report import make_check, make_report
from .common import finish, out_path

OPERATORS = ("jones", "zero", "localized")

POLYNOMIAL_TOL = 1e-10
RESTRICTION_TOL = 1e-12
STABLE_REL = 0.10
UNSTABLE_GROWTH = 2.0


def random_polynomial(n: int, degree: int) -> AnalyticField:
    """Seeded coefficients in [-1, 1] for every monomial of degree <= `degree`."""
    alphas = multi_indices(n, degree)
    coefficients = Global.rng.uniform(-1.0, 1.0, len(alphas))
    return polynomial_field(dict(zip(alphas, coefficients)), n)


def polynomial_reproduction(plan: ExtensionPlan, grid: int) -> float:
    """Max error of the extension of a degree k-1 polynomial on the small-cube union."""
    poly = random_polynomial(plan.n, plan.k - 1)
    ext = jones_extend(poly, plan, grid)
    points = ext.points()
    exterior = ~plan.oracle.contains(points) & plan.partition.in_union(points)
    if not np.any(exterior):
        return 0.0
    values = ext.values.reshape(-1)[exterior]
    return float(np.max(np.abs(values - poly.value(points[exterior]))))


def restriction_error(u: AnalyticField, field, oracle: DomainOracle) -> float:
    points = field.points()
    inside = oracle.contains(points)
    if not np.any(inside):
        return 0.0
    return float(np.max(np.abs(field.values.reshape(-1)[inside] - u.value(points[inside]))))


def stability_check(ratios: Sequence[float], expect: str) -> Dict[str, Any]:
    ratios = np.asarray(ratios, dtype=float)
    if expect == "growth":
        growth = float(ratios[-1] / ratios[0])
        return make_check(f"norm ratio grows more than {UNSTABLE_GROWTH:g}x across the ladder",
                          growth, UNSTABLE_GROWTH, bool(growth > UNSTABLE_GROWTH))
    spread = float(ratios.max() / ratios.min() - 1)
    return make_check(f"norm ratio varies less than {STABLE_REL:.0%} across the ladder",
                      spread, STABLE_REL, bool(spread < STABLE_REL))


def _jones(u: AnalyticField, oracle: DomainOracle, root: RootBox, k: int, p: float,
           grids: Sequence[int], j_max: int, expect: str, support: bool):
    plan = build_extension_plan(oracle, root, k, j_max=j_max,
                                search_radius_factor=Config.reflection_search_factor)
    rows: List[Dict[str, Any]] = []
    ext = None
    for grid in grids:
        print(f"Extending on {grid} cells per side...")
        ext = jones_extend(u, plan, grid)
        row = {"grid": grid, **extension_norm_ratio(u, ext, plan, k, p),
               "restriction_error": restriction_error(u, ext, oracle)}
        if support:
            report = support_diagnostics(u, ext, plan, raise_on_leak=False)
            row.update({"contact_set_ok": report.contact_set_ok,
                        "enlargement_radius": report.enlargement_radius})
        rows.append(row)
    table = pd.DataFrame(rows)

    checks = [
        make_check("extension restricts to u on the domain",
                   float(table["restriction_error"].max()), RESTRICTION_TOL,
                   bool(table["restriction_error"].max() <= RESTRICTION_TOL)),
    ]
    error = polynomial_reproduction(plan, grids[-1])
    checks.append(make_check(f"polynomials of degree {k - 1} are reproduced on the small cubes",
                             error, POLYNOMIAL_TOL, bool(error <= POLYNOMIAL_TOL)))
    if len(grids) >= 2:
        checks.append(stability_check(table["ratio"], expect))
    if support:
        checks.append(make_check("exterior samples away from reflected supp u vanish",
                                 bool(table["contact_set_ok"].all()), True,
                                 bool(table["contact_set_ok"].all())))
        radii = table["enlargement_radius"].to_numpy()
        if np.all(np.isfinite(radii)) and len(radii) >= 2:
            spread = float(radii.max() - radii.min())
            cell = float(table["h"].max())
            checks.append(make_check("support enlargement radius is h-independent within one cell",
                                     spread, cell, bool(spread <= cell)))
    return ext, table, checks, plan.summary()


def _zero(u: AnalyticField, oracle: DomainOracle, root: RootBox, k: int, p: float,
          grids: Sequence[int]):
    box = (root.lower, root.upper)
    rows = []
    ext = None
    for grid in grids:
        result = extend_by_zero(u, oracle, grid, k, p, box)
        ext = result.field
        rows.append({"grid": grid, **result.to_record(),
                     "restriction_error": restriction_error(u, ext, oracle)})
    table = pd.DataFrame(rows)
    defect = float(table["relative_defect"].max())
    checks = [
        make_check("extension restricts to u on the domain",
                   float(table["restriction_error"].max()), RESTRICTION_TOL,
                   bool(table["restriction_error"].max() <= RESTRICTION_TOL)),
        make_check("norm of the zero extension equals the norm on the domain",
                   defect, RESTRICTION_TOL, bool(defect <= RESTRICTION_TOL)),
    ]
    return ext, table, checks, {}


def patches_from_config(specs: Union[List[Dict[str, Any]], None], oracle: DomainOracle,
                        root: RootBox, k: int, j_max: int) -> List[Patch]:
    """Each entry is {center, radius, domain?}; no entries means one global patch."""
    if not specs:
        plan = build_extension_plan(oracle, root, k, j_max=j_max)
        return [Patch(np.zeros(oracle.n), math.inf, oracle, plan)]
    patches = []
    for spec in specs:
        if "center" not in spec or "radius" not in spec:
            raise ConfigError("A patch needs a center and a radius", {"key": "patches", "value": spec})
        patch_oracle = domain_from_config(resolve_domain(spec["domain"])) if "domain" in spec else oracle
        plan = build_extension_plan(patch_oracle, root, k, j_max=j_max)
        patches.append(Patch(np.asarray(spec["center"], dtype=float), float(spec["radius"]),
                             patch_oracle, plan))
    return patches


def _localized(u: AnalyticField, oracle: DomainOracle, root: RootBox, k: int, p: float,
               grids: Sequence[int], j_max: int, dirichlet, patches, r: float):
    part = boundary_part_from_config(dirichlet, oracle)
    plan = build_localized_plan(oracle, part, patches_from_config(patches, oracle, root, k, j_max),
                                r, root, k)
    rows = []
    result = None
    for grid in grids:
        print(f"Localized extension on {grid} cells per side...")
        result = localized_extend(u, plan, grid, p)
        rows.append({"grid": grid, "h": result.field.h, **result.to_record()})
    table = pd.DataFrame(rows)

    defect = float(table["restriction_defect"].max())
    traces = table["dirichlet_trace"].to_numpy()
    hs = table["h"].to_numpy()
    constant = traces[0] / math.sqrt(hs[0])
    bounds = np.maximum(Config.trace_floor, constant * np.sqrt(hs)) * (1 + 1e-9)
    checks = [
        make_check("recombined cutoffs restrict to u on the domain", defect, RESTRICTION_TOL,
                   bool(defect <= RESTRICTION_TOL)),
        make_check("trace on D stays below max(floor, C h^(1/2)) with C from the coarsest grid",
                   traces.tolist(), bounds.tolist(), bool(np.all(traces <= bounds))),
    ]
    if len(grids) >= 2:
        checks.append(stability_check(table["ratio"], "stable"))
    summary = {"patches": len(plan.patches), "max_overlap": plan.max_overlap,
               "free_samples": len(plan.free_samples), "r": r}
    return result.field, table, checks, summary


def run_extend(domain: DomainSpec = "lshape", operator: str = "jones", field: FieldSpec = "sine",
               k: int = 1, p: float = 2.0, grids: Union[str, Sequence[int], None] = None,
               margin: float = 0.25, j_max: Union[int, None] = None,
               expect: str = "stable", support: bool = False,
               dirichlet: Any = None, patches: Union[List[Dict[str, Any]], None] = None,
               r: float = 0.125, root: Union[Dict[str, Any], None] = None,
               dump: bool = True) -> Dict[str, Any]:
    if operator not in OPERATORS:
        raise ConfigError(f"Unknown operator {operator!r}, available: {', '.join(OPERATORS)}",
                          {"key": "operator", "value": operator})
    if expect not in ("stable", "growth"):
        raise ConfigError("expect must be 'stable' or 'growth'", {"key": "expect", "value": expect})
    grids = parse_number_list(grids, int) if grids is not None else list(Config.grids)
    check_grid_ladder(grids)
    k = int(k)
    p = float(p)
    if not p > 1:
        raise ConfigError(f"p must be > 1, got {p}", {"key": "p"})

    oracle = domain_from_config(resolve_domain(domain))
    box = root_for(oracle, margin, root)
    u = field_from_spec(field, oracle.n)
    j_max = default_j_max(max(grids)) if j_max is None else int(j_max)
    print(f"Extending {u.label} from {oracle.kind} with the {operator} operator, k={k} p={p:g}")

    if operator == "jones":
        ext, table, checks, summary = _jones(u, oracle, box, k, p, grids, j_max, expect, support)
    elif operator == "zero":
        ext, table, checks, summary = _zero(u, oracle, box, k, p, grids)
    else:
        ext, table, checks, summary = _localized(u, oracle, box, k, p, grids, j_max,
                                                 dirichlet, patches, r)

    extra: Dict[str, Any] = {"domain": oracle.describe(), "operator": operator, "field": u.label,
                             "k": k, "p": p, "grids": grids, "j_max": j_max, "plan": summary}
    if dump and ext is not None:
        path = write_grid_dump(out_path(f"extend_{operator}_{grids[-1]}.grid"), ext)
        print(f"Wrote {path}")
        extra["grid_dump"] = path
    report = make_report("extend", checks, **extra)
    return finish(report, {"norms": table}, name=f"extend_{operator}")

