import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from ..config import Config
from ..errors import NotRegular
from ..utils.sample_evenly import sample_evenly_indices

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AhlforsCloud:
    """
    Weighted points on a set D; the weights are a quadrature for the
    d-dimensional Hausdorff measure restricted to D.
    """

    points: np.ndarray
    weights: np.ndarray
    d: float
    normals: Union[np.ndarray, None] = None
    constant: Union[float, None] = None
    label: str = ""
    _tree: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if len(points) != len(weights):
            raise ValueError(
                f"Cloud has {len(points)} points but {len(weights)} weights")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValueError("Cloud weights must be strictly positive and finite")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self):
        return len(self.points)

    @property
    def tree(self) -> cKDTree:
        if not self._tree:
            self._tree.append(cKDTree(self.points))
        return self._tree[0]

    def ball_mass(self, centers: np.ndarray, r: float) -> np.ndarray:
        """Sum of weights of cloud points with |p - x| <= r, per center."""
        neighbours = self.tree.query_ball_point(np.atleast_2d(centers), r)
        return np.array([self.weights[idx].sum() if idx else 0.0 for idx in neighbours])

    def with_constant(self, constant: float) -> "AhlforsCloud":
        return AhlforsCloud(self.points, self.weights, self.d, self.normals, constant, self.label)


def ahlfors_check(cloud: AhlforsCloud, radii: Sequence[float],
                  cap: Union[float, None] = None,
                  max_centers: Union[int, None] = None) -> float:
    """
    Returns sup over sampled centers x and radii r of max(r^d/mass, mass/r^d),
    where mass is the cloud weight in the closed ball B(x, r).
    """
    cap = Config.ahlfors_cap if cap is None else cap
    max_centers = Config.ahlfors_max_centers if max_centers is None else max_centers
    radii = sorted(float(r) for r in radii)
    if len(cloud) == 0:
        raise NotRegular("The cloud is empty")
    if len(radii) < 3:
        raise ValueError(f"ahlfors_check needs at least 3 radii, got {len(radii)}")

    centers = cloud.points[sample_evenly_indices(len(cloud), max_centers)]
    worst = 0.0
    worst_at = None
    for r in radii:
        mass = cloud.ball_mass(centers, r)
        scale = r ** cloud.d
        with np.errstate(divide='ignore'):
            ratio = np.maximum(np.where(mass > 0, scale / mass, np.inf), mass / scale)
        i = int(np.argmax(ratio))
        if ratio[i] > worst:
            worst = float(ratio[i])
            worst_at = (centers[i].tolist(), r)
    logger.debug(f"Ahlfors constant {worst:.4g} over {len(centers)} centers, radii {radii}")
    if not worst <= cap:
        raise NotRegular(
            f"Ahlfors constant {worst:.4g} exceeds the cap {cap:g}",
            {"constant": worst, "cap": cap, "at": worst_at, "d": cloud.d})
    return worst


def segment_cloud(count: int, start=(0.0, 0.0), end=(1.0, 0.0)) -> AhlforsCloud:
    """Midpoints of `count` equal pieces of a straight segment, d = 1."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    t = (np.arange(count) + 0.5) / count
    length = float(np.linalg.norm(end - start))
    tangent = (end - start) / length
    normal = np.array([-tangent[1], tangent[0]]) if len(start) == 2 else None
    normals = None if normal is None else np.tile(normal, (count, 1))
    return AhlforsCloud(start + t[:, None] * (end - start),
                        np.full(count, length / count), 1.0, normals, label="segment")


def circle_cloud(count: int, radius: float = 1.0, center=(0.0, 0.0)) -> AhlforsCloud:
    angles = 2 * np.pi * (np.arange(count) + 0.5) / count
    normals = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return AhlforsCloud(np.asarray(center) + radius * normals,
                        np.full(count, 2 * np.pi * radius / count), 1.0, normals, label="circle")


def point_cloud(point=(0.0, 0.0), d: float = 1.0) -> AhlforsCloud:
    return AhlforsCloud(np.atleast_2d(point), np.ones(1), d, label="point")
