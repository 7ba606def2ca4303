import math
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from ..config import Config, check_grid_ladder, parse_number_list
from ..errors import ConfigError
from ..extension.jw import cloud_complement, jw_extend
from ..extension.plan import default_j_max
from ..funcspace.besov import BesovJet, admissible_smoothness, besov_norm, jet_of_field
from ..funcspace.catalog import FieldSpec, field_from_spec
from ..geometry.ahlfors import AhlforsCloud, ahlfors_check
from ..geometry.factory import cloud_from_spec, domain_from_config, root_for
from ..trace.jets import interior_restrict_jet, restrict_jet
from ..utils.data import resolve_domain
from ..utils.report import make_check, make_report
from .common import finish

AHLFORS_RADII = (1 / 8, 1 / 16, 1 / 32, 1 / 64)
DEFAULT_RADII = (1 / 32, 1 / 64)
ROUNDTRIP_TOL = 0.05
HOMOGENEITY_TOL = 1e-12


def relative_jet_error(approx: BesovJet, exact: BesovJet) -> float:
    """Weighted L2 distance of the jets over the weighted L2 size of `exact`."""
    w = approx.cloud.weights[:, None]
    num = float(np.sum(w * (approx.values - exact.values) ** 2))
    den = float(np.sum(w * exact.values ** 2))
    if den == 0:
        return math.sqrt(num)
    return math.sqrt(num / den)


def regularity(cloud: AhlforsCloud) -> float:
    print(f"Checking Ahlfors regularity of {cloud.label} (d = {cloud.d:.4g})...")
    return ahlfors_check(cloud, AHLFORS_RADII)


def roundtrip(jet: BesovJet, grids: Sequence[int], margin: float = 0.25,
              j_max: Union[int, None] = None) -> pd.DataFrame:
    """Extends the jet to each lattice and restricts it back with balls of 8h and 4h."""
    complement = cloud_complement(jet.cloud)
    root = root_for(complement, margin)
    rows = []
    for grid in grids:
        levels = default_j_max(grid) if j_max is None else j_max
        print(f"Extending the jet to {grid} cells per side and restricting back...")
        field = jw_extend(jet, root, grid, levels, complement)
        back = restrict_jet(field, jet.cloud, jet.k, (8 * field.h, 4 * field.h))
        rows.append({"grid": grid, "h": field.h, "j_max": levels,
                     "relative_error": relative_jet_error(back.jet, jet),
                     "max_residual": back.max_residual})
    return pd.DataFrame(rows)


def run_trace(cloud: str = "koch:5", field: FieldSpec = "const:1", k: int = 1,
              radii: Union[str, Sequence[float], None] = None, domain: Any = None,
              tol: float = 1e-6, jw: bool = False,
              grids: Union[str, Sequence[int], None] = None) -> Dict[str, Any]:
    k = int(k)
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}", {"key": "k"})
    points = cloud_from_spec(cloud)
    constant = regularity(points)
    u = field_from_spec(field, points.n)
    radii = parse_number_list(radii, float) if radii is not None else list(DEFAULT_RADII)

    if domain is not None:
        oracle = domain_from_config(resolve_domain(domain))
        print(f"Restricting {u.label} from inside {oracle.kind} to {points.label}...")
        report = interior_restrict_jet(u, oracle, points, k, radii)
    else:
        print(f"Restricting {u.label} to {points.label}...")
        report = restrict_jet(u, points, k, radii)
    exact = jet_of_field(u, points, k)
    error = float(np.max(np.abs(report.jet.values - exact.values)))

    checks = [
        make_check("Ahlfors constant within the cap", constant, Config.ahlfors_cap,
                   bool(constant <= Config.ahlfors_cap)),
        make_check("restricted jet matches the pointwise jet", error, tol, bool(error <= tol)),
    ]
    tables: Dict[str, pd.DataFrame] = {"jet": report.to_frame()}
    extra: Dict[str, Any] = {"cloud": points.label, "d": points.d, "points": len(points),
                             "field": u.label, "k": k, "radii": [float(r) for r in report.radii],
                             "ahlfors_constant": constant, "max_residual": report.max_residual}

    if jw:
        grids = parse_number_list(grids, int) if grids is not None else list(Config.grids)
        check_grid_ladder(grids)
        table = roundtrip(exact, grids)
        errors = table["relative_error"].to_numpy()
        checks.append(make_check("extend then restrict recovers the jet at the finest grid",
                                 float(errors[-1]), ROUNDTRIP_TOL, bool(errors[-1] <= ROUNDTRIP_TOL)))
        if len(errors) >= 2:
            checks.append(make_check("round trip error decreases under refinement",
                                     errors.tolist(), None, bool(np.all(np.diff(errors) < 0))))
        tables["roundtrip"] = table

    return finish(make_report("trace", checks, **extra), tables)


def run_besov(cloud: str = "koch:5", field: FieldSpec = "sine", k: int = 1, p: float = 2.0,
              s: Union[float, None] = None, j_max: Union[int, None] = None,
              other: FieldSpec = "linear") -> Dict[str, Any]:
    points = cloud_from_spec(cloud)
    constant = regularity(points)
    k = int(k)
    p = float(p)
    s = admissible_smoothness(k, points.n, points.d, p) if s is None else float(s)
    j_max = Config.j_max if j_max is None else int(j_max)
    u = field_from_spec(field, points.n)
    v = field_from_spec(other, points.n)
    jet = jet_of_field(u, points, k)
    print(f"Besov norm of {u.label} on {points.label}: s={s:.4g} p={p:g} up to shell {j_max}")
    result = besov_norm(jet, s, p, j_max)

    doubled = besov_norm(jet.scaled(2.0), s, p, j_max).norm
    homogeneity = abs(doubled - 2 * result.norm) / max(result.norm, 1e-300)
    other_jet = jet_of_field(v, points, k)
    other_norm = besov_norm(other_jet, s, p, j_max).norm
    summed = besov_norm(jet.plus(other_jet), s, p, j_max).norm
    slack = result.norm + other_norm - summed

    checks: List[Dict[str, Any]] = [
        make_check("Ahlfors constant within the cap", constant, Config.ahlfors_cap,
                   bool(constant <= Config.ahlfors_cap)),
        make_check("norm is finite and nonnegative", result.norm, None,
                   bool(np.isfinite(result.norm) and result.norm >= 0)),
        make_check("norm of 2f is twice the norm of f", homogeneity, HOMOGENEITY_TOL,
                   bool(homogeneity <= HOMOGENEITY_TOL)),
        make_check("triangle inequality with a second jet", slack, 0.0,
                   bool(slack >= -HOMOGENEITY_TOL * max(summed, 1.0))),
    ]
    extra = {"cloud": points.label, "d": points.d, "field": u.label, "other": v.label,
             "k": k, "p": p, "s": s, "j_max": j_max, "norm": result.norm,
             "lp_part": result.lp_part, "shell_part": result.shell_part}
    return finish(make_report("besov", checks, **extra), {"shells": result.shells})
