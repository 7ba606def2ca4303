"""
Named test fields for configs and the command line, e.g. "const:1",
"sine", "bump:0.5,0.5,0.2", "ramp:1,0.25,2" or "csv:field.csv".
"""
import math
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np

from ..errors import ConfigError
from ..geometry.partition import bump_profile
from ..utils.data import read_lattice_csv
from .fields import AnalyticField, constant_field, polynomial_field, zero_field
from .multiindex import multi_indices

FieldSpec = Union[str, Dict[str, Any]]


def sine_field(n: int = 2, frequency: float = math.pi, max_order: int = 4) -> AnalyticField:
    """prod_i sin(w x_i), with exact derivatives."""
    w = float(frequency)

    def evaluator(alpha):
        def run(x):
            out = np.ones(len(x))
            for i, a in enumerate(alpha):
                out *= w ** a * np.sin(w * x[:, i] + a * math.pi / 2)
            return out
        return run

    derivatives = {alpha: evaluator(alpha) for alpha in multi_indices(n, max_order) if sum(alpha) > 0}
    return AnalyticField(evaluator((0,) * n), n, derivatives=derivatives, label="sine")


def bump_field(center: Sequence[float], radius: float) -> AnalyticField:
    """exp(1 - 1/(1 - |x - c|^2/r^2)) inside B(c, r), exactly 0 outside."""
    center = np.asarray(center, dtype=float)
    radius = float(radius)

    def run(x):
        return bump_profile(np.linalg.norm(x - center, axis=1) / radius)

    return AnalyticField(run, len(center), label=f"bump:{','.join(f'{c:g}' for c in center)},{radius:g}")


def ramp_field(n: int, axis: int, offset: float, power: int = 2) -> AnalyticField:
    """(x_axis - offset)^power for x_axis > offset and 0 below, exact derivatives to order power."""
    def evaluator(order):
        scale = math.factorial(power) / math.factorial(power - order) if order <= power else 0.0

        def run(x):
            t = np.maximum(x[:, axis] - offset, 0.0)
            return scale * t ** (power - order) * (x[:, axis] > offset) if order <= power else np.zeros(len(x))
        return run

    derivatives = {}
    for alpha in multi_indices(n, power):
        if sum(alpha) and sum(alpha) == alpha[axis]:
            derivatives[alpha] = evaluator(alpha[axis])
        elif sum(alpha):
            derivatives[alpha] = lambda x: np.zeros(len(x))
    return AnalyticField(evaluator(0), n, derivatives=derivatives,
                         label=f"ramp:{axis},{offset:g},{power}")


def _numbers(arg: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in arg.split(",") if v.strip())
    except ValueError as e:
        raise ConfigError(f"Cannot read field arguments {arg!r}", {"key": "field"}) from e


def field_from_spec(spec: FieldSpec, n: int = 2) -> AnalyticField:
    if isinstance(spec, dict):
        kind = str(spec.get("kind", "")).lower()
        if kind == "polynomial":
            coefficients = {tuple(int(a) for a in str(key).split(",")): float(c)
                            for key, c in spec.get("coefficients", {}).items()}
            return polynomial_field(coefficients, n)
        if kind == "bump":
            return bump_field(spec.get("center", (0.5,) * n), float(spec.get("radius", 0.2)))
        spec = kind
    kind, _, arg = str(spec).partition(":")
    kind = kind.lower()
    if kind in ("const", "constant"):
        return constant_field(float(arg or 1.0), n)
    if kind == "zero":
        return zero_field(n)
    if kind == "linear":
        weights = _numbers(arg) if arg else tuple(float(i + 1) for i in range(n))
        coefficients = {tuple(int(i == j) for j in range(n)): w for i, w in enumerate(weights)}
        return polynomial_field(coefficients, n)
    if kind in ("sine", "smooth"):
        return sine_field(n, float(arg) if arg else math.pi)
    if kind == "bump":
        values = _numbers(arg) if arg else (0.5,) * n + (0.2,)
        if len(values) != n + 1:
            raise ConfigError(f"bump takes {n} center coordinates and a radius", {"key": "field"})
        return bump_field(values[:n], values[n])
    if kind == "ramp":
        values = _numbers(arg) if arg else (n - 1, 0.25, 2)
        return ramp_field(n, int(values[0]), values[1], int(values[2]) if len(values) > 2 else 2)
    if kind == "csv":
        if not arg:
            raise ConfigError("csv needs a path, e.g. csv:field.csv", {"key": "field"})
        return read_lattice_csv(arg).as_analytic()
    raise ConfigError(f"Unknown field {spec!r}", {"key": "field"})


def glue_pair(name: str, n: int = 2) -> Tuple[AnalyticField, AnalyticField]:
    """
    (inside, outside) fields for the unit square interface:
    "smooth" matches to every order, "jump" has mismatched values and
    "kink" matched values with mismatched normal derivatives.
    """
    name = name.lower()
    if name in ("smooth", "matched"):
        u = sine_field(n)
        return u, u
    if name == "jump":
        return zero_field(n), constant_field(1.0, n)
    if name == "kink":
        # prod x_i (1 - x_i) vanishes on the boundary of the unit cube
        poly = {(0,) * n: 1.0}
        for i in range(n):
            nxt = {}
            for alpha, c in poly.items():
                for power, sign in ((1, 1.0), (2, -1.0)):
                    key = tuple(a + power * (j == i) for j, a in enumerate(alpha))
                    nxt[key] = nxt.get(key, 0.0) + sign * c
            poly = nxt
        return zero_field(n), polynomial_field(poly, n)
    raise ConfigError(f"Unknown glue pair {name!r}, expected smooth, jump or kink", {"key": "pair"})
