import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import pandas as pd

from ..config import Config, check_grid_ladder
from ..errors import ConfigError
from ..funcspace.fields import AnalyticField, GridField, lattice_points
from ..funcspace.norms import grid_terms
from ..funcspace.quadrature import lattice_box
from ..geometry.domains import DomainOracle

logger = logging.getLogger(__name__)


@dataclass
class GlueResult:
    field: GridField
    table: pd.DataFrame
    verdict: str
    top_growth: float
    relative_change: float

    def to_record(self) -> dict:
        return {"verdict": self.verdict, "top_growth": self.top_growth,
                "relative_change": self.relative_change}


def composite(u_in: AnalyticField, u_out: AnalyticField, oracle: DomainOracle, grid: int,
              box: Tuple[Sequence[float], Sequence[float]]) -> GridField:
    """u_in at cell centers inside the domain, u_out at the others."""
    lower, h, dims = lattice_box(oracle, grid, box)
    points = lattice_points(lower, h, dims)
    inside = oracle.contains(points)
    values = np.empty(len(points))
    values[inside] = u_in.value(points[inside])
    values[~inside] = u_out.value(points[~inside])
    return GridField(lower, h, values.reshape(dims), mask=inside.reshape(dims),
                     label=f"glued:{u_in.label}|{u_out.label}")


def glue(u_in: AnalyticField, u_out: AnalyticField, oracle: DomainOracle, k: int, p: float,
         grids: Sequence[int], box: Tuple[Sequence[float], Sequence[float]]) -> GlueResult:
    """
    W^{k,p} norms of the glued field on the whole box over a refining ladder.
    Growth of the top-order seminorm between the two finest grids marks
    mismatched traces; a settled norm marks matched ones.
    """
    check_grid_ladder(grids)
    if len(grids) < 2:
        raise ConfigError("Gluing needs at least two grids", {"key": "grids"})
    rows = []
    field = None
    for grid in grids:
        field = composite(u_in, u_out, oracle, grid, box)
        terms = grid_terms(field, np.ones(field.dims, dtype=bool), k, p)
        seminorms = [0.0] * (k + 1)
        for alpha, value in terms.items():
            seminorms[sum(alpha)] += value
        row = {"grid": grid, "h": field.h, "norm": float(sum(seminorms))}
        row.update({f"seminorm_{j}": v for j, v in enumerate(seminorms)})
        rows.append(row)
    table = pd.DataFrame(rows)

    top = table[f"seminorm_{k}"].to_numpy()
    norms = table["norm"].to_numpy()
    growth = float(top[-1] / top[-2]) if top[-2] > 0 else (float("inf") if top[-1] > 0 else 1.0)
    change = float(abs(norms[-1] - norms[-2]) / max(norms[-1], 1e-300))
    if growth >= Config.glue_growth:
        verdict = "mismatched"
    elif change <= Config.glue_stable_rel:
        verdict = "matched"
    else:
        verdict = "inconclusive"
    logger.info(f"Glue on {oracle.kind}, k={k} p={p}: {verdict} "
                f"(growth {growth:.4g}, change {change:.3g})")
    return GlueResult(field, table, verdict, growth, change)
