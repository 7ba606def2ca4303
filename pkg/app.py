import json
import os
import sys
from typing import Any, Callable, Dict, Iterable, Union

import fire

from sobolev_ext.config import Config, config_keys, process_config
from sobolev_ext.errors import ConfigError, SobolevExtError
from sobolev_ext.globals import initialize_global
from sobolev_ext.utils.data import init_data_dir, read_yaml_config
from sobolev_ext.utils.report import error_record, write_json


def setup(config: Union[str, None] = None, data_dir: Union[str, None] = None,
          out: Union[str, None] = None, deterministic: Union[bool, None] = None,
          seed: Union[int, None] = None, verbose: Union[bool, None] = None,
          command_keys: Iterable[str] = ()) -> Dict[str, Any]:
    """
    Applies inline flags, then the YAML config on top of them. Keys naming a
    command parameter are handed back; every other key must be a Config attribute.
    """
    if data_dir is not None:
        Config.data_dir = data_dir
    if out is not None:
        Config.out_dir = out
    if deterministic is not None:
        Config.deterministic = deterministic
    if seed is not None:
        Config.seed = int(seed)
    if verbose is not None:
        Config.verbose = verbose

    params: Dict[str, Any] = {}
    config_from_file = read_yaml_config(config_path=config)
    if config and config_from_file is None:
        raise ConfigError(f"Config file {config} does not exist", {"key": "config", "value": config})
    for key, value in (config_from_file or {}).items():
        if key in command_keys:
            params[key] = value
            continue
        if not hasattr(Config, key):
            raise ConfigError(
                f"Invalid config key '{key}' in {config}. Available keys: {', '.join(config_keys())}",
                {"key": key})
        setattr(Config, key, value)

    process_config()
    initialize_global()
    init_data_dir()
    return params


def run(command: Callable[..., Dict[str, Any]], params: Dict[str, Any],
        config: Union[str, None], data_dir: Union[str, None], out: Union[str, None],
        deterministic: Union[bool, None], seed: Union[int, None], verbose: Union[bool, None],
        command_keys: Iterable[str] = ()):
    try:
        params.update(setup(config, data_dir, out, deterministic, seed, verbose,
                            command_keys=command_keys or params.keys()))
        report = command(**params)
    except (SobolevExtError, ValueError) as e:
        if not isinstance(e, SobolevExtError):
            e = ConfigError(str(e))
        os.makedirs(Config.out_dir, exist_ok=True)
        path = write_json(os.path.join(Config.out_dir, "error.json"), error_record(e))
        print(f"{e.__class__.__name__}: {e.message}\nWrote {path}", file=sys.stderr)
        sys.exit(e.exit_code)
    print(json.dumps({"command": report["command"], "pass": report["pass"]}))
    sys.exit(0 if report["pass"] else 2)


def whitney(domain: Any = "square", jmax: Union[int, None] = None, probe: bool = False,
            root: Any = None, config: Union[str, None] = None, data_dir: Union[str, None] = None,
            out: Union[str, None] = None, deterministic: Union[bool, None] = None,
            seed: Union[int, None] = None, verbose: Union[bool, None] = None):
    '''
    Whitney decomposition of a domain: cover CSV plus an invariant report.

    :param domain: A domain spec ("square", "lshape", "koch:4", "cusp:9", "empty"), a name under data_dir/domains, or a mapping.
    :param jmax: Finest dyadic level.
    :param probe: Also estimate the (eps, delta) constants by sampling point pairs.
    '''
    from sobolev_ext.lib.whitney import run_whitney
    run(run_whitney, {"domain": domain, "j_max": jmax, "probe": probe, "root": root},
        config, data_dir, out, deterministic, seed, verbose)


def extend(domain: Any = "lshape", operator: str = "jones", field: Any = "sine", k: int = 1,
           p: float = 2.0, grids: Any = None, margin: float = 0.25, jmax: Union[int, None] = None,
           expect: str = "stable", support: bool = False, dirichlet: Any = None,
           patches: Any = None, r: float = 0.125, root: Any = None,
           config: Union[str, None] = None, data_dir: Union[str, None] = None,
           out: Union[str, None] = None, deterministic: Union[bool, None] = None,
           seed: Union[int, None] = None, verbose: Union[bool, None] = None):
    '''
    Extends a field from a domain and reports norm ratios over a grid ladder.

    :param operator: "jones", "zero" or "localized".
    :param expect: "stable" for (eps, delta) domains, "growth" for the negative control on cusps.
    :param support: Also check that the extension keeps away from where u vanishes.
    :param dirichlet: The part D of the boundary for the localized operator, e.g. "bottom".
    '''
    from sobolev_ext.lib.extend import run_extend
    run(run_extend, {"domain": domain, "operator": operator, "field": field, "k": k, "p": p,
                     "grids": grids, "margin": margin, "j_max": jmax, "expect": expect,
                     "support": support, "dirichlet": dirichlet, "patches": patches, "r": r,
                     "root": root},
        config, data_dir, out, deterministic, seed, verbose)


def trace(cloud: str = "koch:5", field: Any = "const:1", k: int = 1, radii: Any = None,
          domain: Any = None, tol: float = 1e-6, jw: bool = False, grids: Any = None,
          config: Union[str, None] = None, data_dir: Union[str, None] = None,
          out: Union[str, None] = None, deterministic: Union[bool, None] = None,
          seed: Union[int, None] = None, verbose: Union[bool, None] = None):
    '''
    Restricts a field to a d-set given as a weighted point cloud.

    :param cloud: "koch:5", "segment:1000", "circle:512" or "point".
    :param domain: Restrict from inside this domain with one-sided averages.
    :param jw: Also extend the exact jet to the grid ladder and restrict it back.
    '''
    from sobolev_ext.lib.trace import run_trace
    run(run_trace, {"cloud": cloud, "field": field, "k": k, "radii": radii, "domain": domain,
                    "tol": tol, "jw": jw, "grids": grids},
        config, data_dir, out, deterministic, seed, verbose)


def besov(cloud: str = "koch:5", field: Any = "sine", k: int = 1, p: float = 2.0,
          s: Union[float, None] = None, jmax: Union[int, None] = None, other: Any = "linear",
          config: Union[str, None] = None, data_dir: Union[str, None] = None,
          out: Union[str, None] = None, deterministic: Union[bool, None] = None,
          seed: Union[int, None] = None, verbose: Union[bool, None] = None):
    '''
    Besov norm of the jet of a field on a d-set.

    :param s: Smoothness; defaults to k - (n - d)/p.
    :param other: Second field for the triangle inequality check.
    '''
    from sobolev_ext.lib.trace import run_besov
    run(run_besov, {"cloud": cloud, "field": field, "k": k, "p": p, "s": s, "j_max": jmax,
                    "other": other},
        config, data_dir, out, deterministic, seed, verbose)


def glue(pair: str = "smooth", k: int = 1, p: float = 2.0, grids: Any = None,
         margin: float = 0.25, expect: Union[str, None] = None,
         matched: Union[str, None] = None, jump: bool = False,
         config: Union[str, None] = None, data_dir: Union[str, None] = None,
         out: Union[str, None] = None, deterministic: Union[bool, None] = None,
         seed: Union[int, None] = None, verbose: Union[bool, None] = None):
    '''
    Glues an inside and an outside field across the unit square.

    :param pair: "smooth", "jump" or "kink".
    :param matched: Shorthand for --pair, e.g. --matched smooth.
    :param jump: Shorthand for --pair jump.
    '''
    from sobolev_ext.lib.glue import run_glue
    if jump:
        pair = "jump"
    elif matched:
        pair = matched
    run(run_glue, {"pair": pair, "k": k, "p": p, "grids": grids, "margin": margin,
                   "expect": expect},
        config, data_dir, out, deterministic, seed, verbose)


def solve(case: str = "mixed-left", grids: Any = None, problem: Any = None,
          config: Union[str, None] = None, data_dir: Union[str, None] = None,
          out: Union[str, None] = None, deterministic: Union[bool, None] = None,
          seed: Union[int, None] = None, verbose: Union[bool, None] = None):
    '''
    Solves the mixed problem for a manufactured case or a configured problem.

    :param case: "sine-dirichlet", "mixed-left" or "neumann-constant".
    :param problem: A name under data_dir/problems or a YAML path.
    '''
    from sobolev_ext.lib.solve import run_solve
    run(run_solve, {"case": case, "grids": grids, "problem": problem},
        config, data_dir, out, deterministic, seed, verbose)


def counterexample(case: str = "meyers", mu: Union[float, None] = None,
                   gamma: Union[float, None] = None, epsilon: Union[float, None] = None,
                   m: Union[int, None] = None, n: Union[int, None] = None, grids: Any = None,
                   p_values: Any = None, levels: Any = None,
                   config: Union[str, None] = None, data_dir: Union[str, None] = None,
                   out: Union[str, None] = None, deterministic: Union[bool, None] = None,
                   seed: Union[int, None] = None, verbose: Union[bool, None] = None):
    '''
    Threshold checks for the Meyers, De Giorgi and Mazya examples.

    :param case: "meyers", "degiorgi" or "mazya".
    :param levels: Shell-level depths for the singular norm scans.
    '''
    from sobolev_ext.lib.solve import run_counterexample
    params = {"mu": mu, "gamma": gamma, "epsilon": epsilon, "m": m, "n": n, "grids": grids,
              "p_values": p_values, "levels": levels}
    keys = list(params)
    params = {key: value for key, value in params.items() if value is not None}
    run(lambda **kw: run_counterexample(case, **kw), params,
        config, data_dir, out, deterministic, seed, verbose, command_keys=keys)


if __name__ == "__main__":
    fire.Fire({
        "whitney": whitney,
        "extend": extend,
        "trace": trace,
        "besov": besov,
        "glue": glue,
        "solve": solve,
        "counterexample": counterexample,
    })
