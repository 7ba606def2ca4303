import os
from typing import Any, List, Sequence, Union

from .errors import ConfigError


class Config:
    """
    Stores the toolkit configuration. This is a singleton class.
    """

    # Where data is stored
    data_dir: str = "./data"
    out_dir: str = "./out"

    # Run
    deterministic: bool = False
    seed: int = 0
    verbose: bool = False

    # Geometry
    j_max: int = 7
    reflection_search_factor: float = 16.0
    ahlfors_cap: float = 8.0
    ahlfors_max_centers: int = 200
    partition_sample_cubes: int = 3
    partition_spread: float = 64.0

    # Quadrature
    boundary_subsample: int = 4
    fd_step: float = 1e-4
    cube_quadrature_cells: int = 2

    # Solver
    cg_tol: float = 1e-10
    cg_max_iter: int = 20000

    # Norm scans
    scan_diverge_slope: float = 0.05
    scan_converge_rel: float = 0.02
    shell_slope_tol: float = 0.02
    shell_levels: int = 14
    threshold_margin: float = 0.05

    # Traces and gluing
    trace_floor: float = 1e-6
    glue_stable_rel: float = 0.05
    glue_growth: float = 1.2

    # Command defaults, may be given as "1,2" strings
    p_values: Union[List[float], str] = [2.0]
    grids: Union[List[int], str] = [16, 32, 64]


def parse_number_list(value: Any, cast=float) -> List[Any]:
    """Accepts "1,2,3", (1, 2, 3) or a single number; fire hands over all three."""
    if value is None:
        return []
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(',')]
        return [cast(part) for part in parts if part]
    if isinstance(value, (list, tuple)):
        return [cast(v) for v in value]
    return [cast(value)]


def check_grid_ladder(grids: Sequence[int]) -> None:
    if len(grids) < 1:
        raise ConfigError("The grid ladder is empty", {"key": "grids"})
    for coarse, fine in zip(grids, grids[1:]):
        if fine <= coarse:
            raise ConfigError(
                f"The grid ladder must strictly refine, got {list(grids)}",
                {"key": "grids", "value": list(grids)})


def check_exponents(p_values: Sequence[float]) -> None:
    for p in p_values:
        if not p > 1:
            raise ConfigError(
                f"Every exponent p must be > 1, got {p}",
                {"key": "p_values", "value": list(p_values)})


def process_config():
    Config.data_dir = os.path.abspath(Config.data_dir)
    Config.out_dir = os.path.abspath(Config.out_dir)

    Config.p_values = parse_number_list(Config.p_values, float)
    Config.grids = parse_number_list(Config.grids, int)
    check_exponents(Config.p_values)
    check_grid_ladder(Config.grids)

    if Config.j_max < 2:
        raise ConfigError(f"j_max must be >= 2, got {Config.j_max}", {"key": "j_max"})
    if Config.boundary_subsample < 1:
        raise ConfigError("boundary_subsample must be >= 1", {"key": "boundary_subsample"})
    if Config.cg_tol <= 0:
        raise ConfigError("cg_tol must be positive", {"key": "cg_tol"})


def config_keys() -> List[str]:
    return [k for k in vars(Config) if not k.startswith('__')]
