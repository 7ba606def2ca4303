import math
from typing import List, Tuple

import numpy as np

from ..errors import ConfigError
from .ahlfors import AhlforsCloud
from .domains import PolygonDomain

KOCH_DIMENSION = math.log(4) / math.log(3)
MAX_LEVEL = 8

# Outward bumps for a counter-clockwise ring: apex is rotated by -pi/3
_COS = math.cos(-math.pi / 3)
_SIN = math.sin(-math.pi / 3)


def grow_koch_curve(p_start: np.ndarray, p_end: np.ndarray, level: int) -> List[np.ndarray]:
    """Vertices of one Koch arc from p_start up to (excluding) p_end."""
    if level == 0:
        return [p_start]
    p0 = p_start + (p_end - p_start) / 3
    p2 = p_start + (p_end - p_start) * 2 / 3
    d = p2 - p0
    p1 = p0 + np.array([_COS * d[0] - _SIN * d[1], _SIN * d[0] + _COS * d[1]])
    points = []
    for a, b in ((p_start, p0), (p0, p1), (p1, p2), (p2, p_end)):
        points.extend(grow_koch_curve(a, b, level - 1))
    return points


def koch_vertices(level: int, side: float = 1.0) -> np.ndarray:
    height = side * math.sqrt(3) / 2
    triangle = np.array([[0.0, 0.0], [side, 0.0], [side / 2, height]])
    triangle -= triangle.mean(axis=0)
    vertices = []
    for i in range(3):
        vertices.extend(grow_koch_curve(triangle[i], triangle[(i + 1) % 3], level))
    return np.array(vertices)


def koch_prefractal(level: int, side: float = 1.0) -> Tuple[PolygonDomain, AhlforsCloud]:
    """
    Snowflake polygon with 3*4^level edges, centered at the origin, and the
    boundary cloud of edge midpoints carrying equal mass per edge (total 1).
    """
    if not 0 <= level <= MAX_LEVEL:
        raise ConfigError(f"Koch level must be within 0..{MAX_LEVEL}, got {level}")
    ring = koch_vertices(level, side)
    domain = PolygonDomain([ring], kind="koch-prefractal", params={"level": level, "side": side})

    a = ring
    b = np.roll(ring, -1, axis=0)
    tangents = b - a
    lengths = np.linalg.norm(tangents, axis=1)
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=1) / lengths[:, None]
    count = len(ring)
    cloud = AhlforsCloud(
        points=(a + b) / 2,
        weights=np.full(count, 1.0 / count),
        d=KOCH_DIMENSION,
        normals=normals,
        label=f"koch:{level}")
    return domain, cloud
