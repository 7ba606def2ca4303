import fnmatch
import os
import shutil
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd
import yaml

from ..config import Config
from ..errors import ConfigError
from ..funcspace.fields import GridField


def init_data_dir():
    os.makedirs(Config.data_dir, exist_ok=True)
    current_file_path = os.path.abspath(__file__)
    parent_directory_path = os.path.dirname(current_file_path)
    project_dir_path = os.path.abspath(
        os.path.join(parent_directory_path, "..", ".."))
    sample_data_dir_path = os.path.join(project_dir_path, "sample_data")
    copy_sample_data_if_not_exists(
        os.path.join(sample_data_dir_path, "domains"),
        os.path.join(Config.data_dir, "domains"))
    copy_sample_data_if_not_exists(
        os.path.join(sample_data_dir_path, "problems"),
        os.path.join(Config.data_dir, "problems"))


def copy_sample_data_if_not_exists(source, destination):
    if os.path.exists(destination) or not os.path.exists(source):
        return

    print(f"Copying sample data to \"{destination}\"")
    shutil.copytree(source, destination)


def read_yaml_config(config_path: Union[str, None] = None) -> Union[Dict[str, Any], None]:
    if not config_path or not os.path.exists(config_path):
        return None

    print(f"Loading config from {config_path}...")
    with open(config_path, 'r') as yaml_file:
        config = yaml.safe_load(yaml_file)
    if config is not None and not isinstance(config, dict):
        raise ConfigError(f"{config_path} must hold a mapping", {"key": "config"})
    return config


def _available_names(subdir: str) -> List[str]:
    directory = os.path.join(Config.data_dir, subdir)
    if not os.path.isdir(directory):
        return []
    names = [
        os.path.splitext(filename)[0] for filename in os.listdir(directory)
        if fnmatch.fnmatch(filename, "*.yaml") or fnmatch.fnmatch(filename, "*.yml")
    ]
    return sorted(names)


def get_available_domain_names() -> List[str]:
    return _available_names("domains")


def get_available_problem_names() -> List[str]:
    return _available_names("problems")


def get_named_config(subdir: str, name: str) -> Union[Dict[str, Any], None]:
    """`name` under data_dir/<subdir>, with or without the .yaml suffix."""
    if "/" in name or "\\" in name:
        return None
    for suffix in ("", ".yaml", ".yml"):
        path = os.path.join(Config.data_dir, subdir, name + suffix)
        if os.path.isfile(path):
            return read_yaml_config(path)
    return None


def resolve_domain(spec: Any) -> Any:
    """A named domain from the data directory, otherwise the spec itself."""
    if isinstance(spec, str) and ":" not in spec:
        named = get_named_config("domains", spec)
        if named is not None:
            return named
    return spec


def read_lattice_csv(path: str, value_columns: Union[List[str], None] = None,
                     label: str = "") -> GridField:
    """
    Imports a field sampled at cell centers of a uniform lattice. Coordinate
    columns are x0, x1, ...; the remaining columns are components.
    """
    table = pd.read_csv(path)
    coords = [c for c in table.columns if c.startswith("x") and c[1:].isdigit()]
    coords.sort(key=lambda c: int(c[1:]))
    if not coords:
        raise ConfigError(f"{path} has no coordinate columns x0, x1, ...", {"path": path})
    value_columns = value_columns or [c for c in table.columns if c not in coords]
    if not value_columns:
        raise ConfigError(f"{path} has no value columns", {"path": path})

    axes = [np.unique(table[c].to_numpy(dtype=float)) for c in coords]
    steps = np.concatenate([np.diff(a) for a in axes if len(a) > 1])
    if len(steps) == 0 or not np.allclose(steps, steps[0], rtol=1e-6):
        raise ConfigError(f"{path} is not a uniform lattice", {"path": path})
    h = float(steps[0])
    dims = tuple(len(a) for a in axes)
    if int(np.prod(dims)) != len(table):
        raise ConfigError(f"{path} has {len(table)} rows for a {dims} lattice", {"path": path})

    index = tuple(np.rint((table[c].to_numpy(dtype=float) - a[0]) / h).astype(int)
                  for c, a in zip(coords, axes))
    values = np.zeros(dims + ((len(value_columns),) if len(value_columns) > 1 else ()))
    data = table[value_columns].to_numpy(dtype=float)
    values[index] = data if len(value_columns) > 1 else data[:, 0]
    origin = np.array([a[0] for a in axes]) - h / 2
    return GridField(origin, h, values, len(value_columns), label=label or os.path.basename(path))
