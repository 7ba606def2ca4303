"""
Plain-text field dumps. The header line is

    GRID n h x0 .. x{n-1} d0 .. d{n-1} components

with x the lattice origin and d the cell counts, followed by whitespace
separated values in row-major order, components innermost.
"""
import os

import numpy as np

from ..errors import ConfigError
from ..funcspace.fields import GridField


def write_grid_dump(path: str, field: GridField) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    header = ["GRID", str(field.n), repr(float(field.h))]
    header += [repr(float(x)) for x in field.origin]
    header += [str(d) for d in field.dims]
    header.append(str(field.components))
    values = field.flat_values().reshape(-1, field.components)
    with open(path, "w") as f:
        f.write(" ".join(header) + "\n")
        np.savetxt(f, values, fmt="%.17g")
    return path


def read_grid_dump(path: str, label: str = "") -> GridField:
    with open(path, "r") as f:
        header = f.readline().split()
        if not header or header[0] != "GRID":
            raise ConfigError(f"{path} does not start with a GRID header", {"path": path})
        try:
            n = int(header[1])
            h = float(header[2])
            origin = np.array([float(v) for v in header[3:3 + n]])
            dims = tuple(int(v) for v in header[3 + n:3 + 2 * n])
            components = int(header[3 + 2 * n])
        except (IndexError, ValueError) as e:
            raise ConfigError(f"Malformed GRID header in {path}: {e}", {"path": path}) from e
        values = np.loadtxt(f, ndmin=1).reshape(-1)

    expected = int(np.prod(dims)) * components
    if len(values) != expected:
        raise ConfigError(f"{path} holds {len(values)} values, the header promises {expected}",
                          {"path": path})
    shape = dims + ((components,) if components > 1 else ())
    return GridField(origin, h, values.reshape(shape), components, label=label or os.path.basename(path))
