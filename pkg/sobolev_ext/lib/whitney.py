import math
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

from ..config import Config
from ..geometry.epsilon_delta import domain_radius, epsilon_delta_probe
from ..geometry.factory import DomainSpec, domain_from_config, root_for
from ..geometry.partition import PartitionOfUnity
from ..geometry.whitney import WhitneyCover, check_whitney_invariants, whitney_decompose
from ..utils.data import resolve_domain
from ..utils.report import make_check, make_report
from ..utils.sample_evenly import sample_evenly_indices
from .common import finish

AXES = ("x", "y", "z")


def cover_frame(cover: WhitneyCover) -> pd.DataFrame:
    """level, i0.., side, truncated, then the lower and upper corners."""
    n = cover.n
    columns: Dict[str, Any] = {"level": cover.levels}
    for d in range(n):
        columns[f"i{d}"] = cover.indices[:, d]
    columns["side"] = cover.sides
    columns["truncated"] = cover.truncated.astype(bool)
    for d in range(n):
        columns[f"{AXES[d] if d < 3 else 'x' + str(d)}0"] = cover.lowers[:, d]
    for d in range(n):
        columns[f"{AXES[d] if d < 3 else 'x' + str(d)}1"] = cover.lowers[:, d] + cover.sides
    return pd.DataFrame(columns)


def run_whitney(domain: DomainSpec = "square", j_max: Union[int, None] = None,
                probe: bool = False, root: Union[Dict[str, Any], None] = None) -> Dict[str, Any]:
    j_max = Config.j_max if j_max is None else int(j_max)
    oracle = domain_from_config(resolve_domain(domain))
    box = root_for(oracle, root=root)
    print(f"Decomposing {oracle.kind} up to level {j_max}...")
    cover = whitney_decompose(oracle, box, j_max)
    stats = check_whitney_invariants(cover)
    sqrt_n = math.sqrt(cover.n)

    checks = [
        make_check("sqrt(n) l(Q) <= dist(Q, boundary) for non-truncated cubes",
                   stats["min_dist_ratio"], sqrt_n, stats["lower_bound_ok"]),
        make_check("dist(Q, boundary) <= 4 sqrt(n) l(Q) for non-truncated cubes",
                   stats["max_dist_ratio"], 4 * sqrt_n, stats["upper_bound_ok"]),
        make_check("touching cubes have side ratio within [1/4, 4]",
                   [stats["min_neighbor_ratio"], stats["max_neighbor_ratio"]], [0.25, 4.0],
                   stats["neighbor_ratio_ok"]),
    ]
    extra: Dict[str, Any] = {"domain": oracle.describe(), "j_max": j_max, "stats": stats,
                             "radius": domain_radius(cover)}
    if probe:
        estimate = epsilon_delta_probe(oracle, cover)
        extra["epsilon_delta"] = {"epsilon": estimate.epsilon, "pairs": estimate.pairs,
                                  "length_epsilon": estimate.length_epsilon,
                                  "cigar_epsilon": estimate.cigar_epsilon,
                                  "worst_pair": estimate.worst_pair}
        checks.append(make_check("sampled epsilon is positive", estimate.epsilon, 0.0,
                                 bool(estimate.epsilon > 0)))

    scales = partition_scales(cover, Config.partition_sample_cubes)
    spread = {order: scale_spread(scales, order) for order in ("d1", "d2")}
    extra["partition_spread"] = spread
    checks.append(make_check(
        "l(Q)^|alpha| |d^alpha phi_Q| stays bounded across levels for |alpha| <= 2",
        spread, Config.partition_spread,
        bool(all(v <= Config.partition_spread for v in spread.values()))))

    counts = pd.DataFrame(sorted(stats["level_counts"].items()), columns=["level", "count"])
    print(f"{len(cover)} cubes, {stats['truncated']} truncated, "
          f"dist ratio in [{stats['min_dist_ratio']:.4g}, {stats['max_dist_ratio']:.4g}]")
    report = make_report("whitney", checks, **extra)
    return finish(report, {"cover": cover_frame(cover), "levels": counts, "partition": scales})


def partition_scales(cover: WhitneyCover, per_level: int = 3) -> pd.DataFrame:
    """Scaled derivative maxima of the cover's partition, a few cubes per level."""
    pou = PartitionOfUnity(cover.cubes)
    indices = []
    for level in np.unique(cover.levels):
        at_level = np.flatnonzero(cover.levels == level)
        indices.extend(at_level[sample_evenly_indices(len(at_level), per_level)].tolist())
    return pou.derivative_scales(indices)


def scale_spread(scales: pd.DataFrame, order: str) -> float:
    """Largest over smallest per-level maximum; 1 for a single level."""
    per_level = scales.groupby("level")[order].max()
    if per_level.empty or per_level.min() <= 0:
        return float("inf") if not per_level.empty and per_level.max() > 0 else 1.0
    return float(per_level.max() / per_level.min())
