from typing import Any, Dict, Sequence, Union

import numpy as np

from ..config import Config, check_grid_ladder, parse_number_list
from ..errors import ConfigError
from ..extension.glue import glue
from ..funcspace.catalog import glue_pair
from ..geometry.domains import unit_square
from ..utils.report import make_check, make_report
from .common import finish


def expected_verdict(pair: str, k: int) -> str:
    """Traces agree up to order 0 for kink and to every order for smooth."""
    pair = pair.lower()
    if pair in ("smooth", "matched"):
        return "matched"
    if pair == "kink":
        return "matched" if k <= 1 else "mismatched"
    return "mismatched"


def run_glue(pair: str = "smooth", k: int = 1, p: float = 2.0,
             grids: Union[str, Sequence[int], None] = None, margin: float = 0.25,
             expect: Union[str, None] = None) -> Dict[str, Any]:
    """
    Glues an inside field on the unit square to an outside field on the
    surrounding box and reports whether the glued W^{k,p} norm settles.
    """
    grids = parse_number_list(grids, int) if grids is not None else list(Config.grids)
    check_grid_ladder(grids)
    k = int(k)
    p = float(p)
    expect = expect or expected_verdict(pair, k)
    if expect not in ("matched", "mismatched"):
        raise ConfigError("expect must be 'matched' or 'mismatched'", {"key": "expect", "value": expect})

    oracle = unit_square()
    u_in, u_out = glue_pair(pair, oracle.n)
    lower, upper = oracle.bbox
    box = (lower - margin, upper + margin)
    print(f"Gluing {u_in.label} | {u_out.label} across the unit square, k={k} p={p:g}")
    result = glue(u_in, u_out, oracle, k, p, grids, box)

    table = result.table
    top = table[f"seminorm_{k}"].to_numpy()
    with np.errstate(divide="ignore", invalid="ignore"):
        table["growth"] = np.concatenate([[np.nan], top[1:] / top[:-1]])

    checks = [make_check(f"glued field is {expect} across the interface", result.verdict, expect,
                         result.verdict == expect)]
    if expect == "matched":
        checks.append(make_check("glued norm settles between the two finest grids",
                                 result.relative_change, Config.glue_stable_rel,
                                 result.relative_change <= Config.glue_stable_rel))
    else:
        checks.append(make_check(f"order {k} seminorm grows between the two finest grids",
                                 result.top_growth, Config.glue_growth,
                                 result.top_growth >= Config.glue_growth))
    extra = {"pair": pair, "k": k, "p": p, "grids": grids, "margin": margin,
             "criterion": "pass" if result.verdict == "matched" else "fail",
             **result.to_record()}
    return finish(make_report("glue", checks, **extra), {"norms": table}, name=f"glue_{pair}")
