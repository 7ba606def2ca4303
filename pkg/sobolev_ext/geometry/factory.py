import logging
from typing import Any, Dict, Tuple, Union

import numpy as np

from ..errors import ConfigError
from . import domains
from .ahlfors import AhlforsCloud, circle_cloud, point_cloud, segment_cloud
from .cubes import RootBox
from .domains import DomainOracle
from .koch import koch_prefractal

logger = logging.getLogger(__name__)

DomainSpec = Union[str, Dict[str, Any]]


def parse_domain_spec(spec: DomainSpec) -> Dict[str, Any]:
    """"koch:4" -> {"kind": "koch", "level": 4}; mappings pass through."""
    if isinstance(spec, dict):
        if "kind" not in spec:
            raise ConfigError(f"Domain config {spec} has no 'kind'", {"key": "domain"})
        return dict(spec)
    if not isinstance(spec, str) or not spec:
        raise ConfigError(f"Cannot read domain spec {spec!r}", {"key": "domain"})
    kind, _, arg = spec.partition(":")
    out: Dict[str, Any] = {"kind": kind}
    if arg:
        key = {"koch": "level", "cusp": "a", "disc": "radius", "squares": "gap"}.get(kind)
        if key is None:
            raise ConfigError(f"Domain kind {kind!r} takes no inline argument", {"key": "domain"})
        out[key] = int(arg) if key == "level" else float(arg)
    return out


def domain_from_config(spec: DomainSpec) -> DomainOracle:
    cfg = parse_domain_spec(spec)
    kind = cfg["kind"].lower()
    if kind in ("square", "unit_square"):
        return domains.unit_square()
    if kind == "rectangle":
        return domains.rectangle(tuple(cfg.get("lower", (0.0, 0.0))), tuple(cfg.get("upper", (1.0, 1.0))))
    if kind in ("lshape", "l-shape"):
        return domains.lshape()
    if kind == "koch":
        return koch_prefractal(int(cfg.get("level", 4)), float(cfg.get("side", 1.0)))[0]
    if kind == "cusp":
        return domains.cusp(float(cfg.get("a", 4.0)), int(cfg.get("vertices", 512)))
    if kind == "strip":
        return domains.SlabDomain(int(cfg.get("n", 2)), int(cfg.get("axis", 1)),
                                  float(cfg.get("lo", 0.0)), float(cfg.get("hi", 1.0)))
    if kind == "disc":
        return domains.polygonal_disc(float(cfg.get("radius", 1.0)), int(cfg.get("vertices", 256)))
    if kind == "ball":
        return domains.BallDomain(cfg.get("center", (0.0, 0.0, 0.0)), float(cfg.get("radius", 1.0)))
    if kind == "box":
        return domains.BoxDomain(cfg["lower"], cfg["upper"])
    if kind == "squares":
        return domains.disjoint_squares(float(cfg.get("gap", 0.5)))
    if kind == "union":
        return domains.UnionDomain([domain_from_config(part) for part in cfg.get("parts", [])])
    if kind == "complement":
        if "of" not in cfg:
            raise ConfigError("A complement needs 'of'", {"key": "domain"})
        return domains.ComplementDomain(domain_from_config(cfg["of"]))
    if kind == "empty":
        return domains.EmptySet(int(cfg.get("n", 2)))
    raise ConfigError(f"Unknown domain kind {kind!r}", {"key": "domain", "kind": kind})


def cloud_from_spec(spec: str) -> AhlforsCloud:
    """"koch:5", "segment:1000", "circle:512" or "point"."""
    kind, _, arg = str(spec).partition(":")
    if kind == "koch":
        return koch_prefractal(int(arg or 5))[1]
    if kind == "segment":
        return segment_cloud(int(arg or 1000))
    if kind == "circle":
        return circle_cloud(int(arg or 512))
    if kind == "point":
        return point_cloud()
    raise ConfigError(f"Unknown cloud spec {spec!r}", {"key": "cloud"})


def root_for(oracle: DomainOracle, margin: float = 0.0,
             root: Union[Dict[str, Any], None] = None) -> RootBox:
    """
    Explicit `root: {origin, side}` wins. Otherwise the smallest cube over the
    bounding box, grown by `margin` times its side on every face.
    """
    if root is not None:
        return RootBox.make(root["origin"], root["side"])
    lower, upper = oracle.bbox
    if not np.all(np.isfinite(lower) & np.isfinite(upper)):
        raise ConfigError(f"Domain {oracle.kind} is unbounded; give an explicit root box",
                          {"key": "root"})
    side = float(np.max(upper - lower))
    if side <= 0:
        return RootBox.make(lower.tolist(), 1.0)
    # Binary rational roots keep cube corners exact
    if margin > 0:
        exact_side = 2.0 ** np.ceil(np.log2(side * (1 + 2 * margin)))
        origin = np.round(((lower + upper) / 2 - exact_side / 2) * 1024) / 1024
    else:
        origin = np.floor(lower * 1024) / 1024
        exact_side = float(np.max(upper - origin))
        if np.any(origin != lower):
            exact_side = float(np.ceil(exact_side * 1024) / 1024)
    return RootBox.make(origin.tolist(), exact_side)


def domain_and_root(cfg: Dict[str, Any], margin: float = 0.0) -> Tuple[DomainOracle, RootBox]:
    oracle = domain_from_config(cfg.get("domain", "square"))
    return oracle, root_for(oracle, margin, cfg.get("root"))
