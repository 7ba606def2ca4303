import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import csgraph

from ..errors import Disconnected
from ..globals import Global
from .domains import DomainOracle
from .whitney import WhitneyCover

logger = logging.getLogger(__name__)


@dataclass
class EpsilonDeltaEstimate:
    epsilon: float
    pairs: int
    worst_pair: Union[Tuple[List[float], List[float]], None]
    length_epsilon: float
    cigar_epsilon: float


def _locate(cover: WhitneyCover, points: np.ndarray) -> np.ndarray:
    """Index of the cover cube containing each point (nearest center as fallback)."""
    lowers = cover.lowers
    uppers = lowers + cover.sides[:, None]
    out = np.empty(len(points), dtype=np.int64)
    for i, x in enumerate(points):
        inside = np.flatnonzero(np.all((lowers <= x) & (x <= uppers), axis=1))
        if inside.size:
            out[i] = inside[np.argmin(cover.sides[inside])]
        else:
            out[i] = int(np.argmin(np.linalg.norm(cover.centers - x, axis=1)))
    return out


def _polyline_epsilon(polyline: np.ndarray, oracle: DomainOracle, samples_per_segment: int
                      ) -> Tuple[float, float]:
    x, y = polyline[0], polyline[-1]
    span = float(np.linalg.norm(y - x))
    length = float(np.sum(np.linalg.norm(np.diff(polyline, axis=0), axis=1)))
    eps_len = span / length if length > 0 else 1.0

    t = np.linspace(0.0, 1.0, samples_per_segment + 1)[1:-1]
    pieces = [a + t[:, None] * (b - a) for a, b in zip(polyline[:-1], polyline[1:])]
    z = np.concatenate(pieces + [polyline[1:-1]])
    dx = np.linalg.norm(z - x, axis=1)
    dy = np.linalg.norm(z - y, axis=1)
    live = (dx > 0) & (dy > 0)
    if not np.any(live) or span == 0:
        return eps_len, np.inf
    dist = oracle.boundary_distance(z[live])
    inside = oracle.contains(z[live])
    dist = np.where(inside, dist, 0.0)
    eps_cigar = float(np.min(dist * span / (dx[live] * dy[live])))
    return eps_len, eps_cigar


def epsilon_delta_probe(oracle: DomainOracle, cover: WhitneyCover, samples: int = 64,
                        pairs: Union[Sequence[Tuple[Sequence[float], Sequence[float]]], None] = None,
                        samples_per_segment: int = 8) -> EpsilonDeltaEstimate:
    """
    Lower-bound style estimate of epsilon: sampled pairs are joined by the
    shortest path through Whitney cube centers and the length and cigar
    conditions are evaluated along the polyline.
    """
    if pairs is None:
        rng = Global.rng
        a = rng.integers(0, len(cover), size=samples)
        b = rng.integers(0, len(cover), size=samples)
        keep = a != b
        starts, ends = cover.centers[a[keep]], cover.centers[b[keep]]
    else:
        starts = np.array([p[0] for p in pairs], dtype=float)
        ends = np.array([p[1] for p in pairs], dtype=float)

    cube_a = _locate(cover, starts)
    cube_b = _locate(cover, ends)
    sources, inverse = np.unique(cube_a, return_inverse=True)
    dist, pred = csgraph.dijkstra(cover.adjacency, directed=False, indices=sources,
                                  return_predecessors=True)

    best = np.inf
    best_len = np.inf
    best_cigar = np.inf
    worst_pair = None
    for k, (x, y) in enumerate(zip(starts, ends)):
        row = inverse[k]
        target = cube_b[k]
        if not np.isfinite(dist[row, target]):
            raise Disconnected(
                f"No path between {x.tolist()} and {y.tolist()}",
                {"start": x.tolist(), "end": y.tolist()})
        path = [target]
        while path[-1] != sources[row]:
            path.append(pred[row, path[-1]])
        centers = cover.centers[path[::-1]]
        polyline = np.vstack([x, centers, y])
        eps_len, eps_cigar = _polyline_epsilon(polyline, oracle, samples_per_segment)
        eps = min(eps_len, eps_cigar)
        if eps < best:
            best, best_len, best_cigar = eps, eps_len, eps_cigar
            worst_pair = (x.tolist(), y.tolist())
    logger.debug(f"epsilon estimate {best:.4g} over {len(starts)} pairs")
    return EpsilonDeltaEstimate(float(best), len(starts), worst_pair, float(best_len), float(best_cigar))


def domain_radius(cover: WhitneyCover, max_samples: int = 400) -> float:
    """
    rad = min over connected components of inf_x sup_y |x - y|; x runs over
    sampled cube centers of the component, y over its cubes (bounding-ball search).
    """
    count, labels = csgraph.connected_components(cover.adjacency, directed=False)
    half_diag = cover.sides * np.sqrt(cover.n) / 2
    radii = []
    for component in range(count):
        idx = np.flatnonzero(labels == component)
        centers = cover.centers[idx]
        candidates = centers
        if len(candidates) > max_samples:
            candidates = candidates[np.linspace(0, len(candidates) - 1, max_samples).astype(int)]
        reach = [float(np.max(np.linalg.norm(centers - x, axis=1) + half_diag[idx]))
                 for x in candidates]
        radii.append(min(reach))
    return min(radii)
