"""
Extension of a Besov jet on a d-set D to the lattice of a root box:
sum_Q phi_Q(x) times the weighted cloud average over B(x_Q, 6 diam Q) of
the Taylor polynomial sum_alpha (x - y)^alpha / alpha! f_alpha(y).
Only Whitney cubes of the complement with side at most 1 take part.
"""
import logging
import math

import numpy as np

from ..errors import EmptyBall
from ..funcspace.besov import BesovJet
from ..funcspace.fields import GridField, lattice_points
from ..funcspace.multiindex import leq, multi_indices, scaled_monomial, sub
from ..funcspace.polynomial import PolynomialBatch
from ..geometry.ahlfors import AhlforsCloud
from ..geometry.cubes import RootBox
from ..geometry.domains import SegmentComplementDomain
from ..geometry.partition import PartitionOfUnity
from ..geometry.whitney import whitney_decompose
from .plan import lattice_for_root

logger = logging.getLogger(__name__)

BALL_FACTOR = 6.0
MAX_SIDE = 1.0


def cloud_complement(cloud: AhlforsCloud, closed: bool = None) -> SegmentComplementDomain:
    """R^2 minus the polyline through the cloud points in order; rings for closed curves."""
    if cloud.n != 2:
        raise ValueError("Cloud complements are planar")
    if closed is None:
        closed = cloud.label.startswith(("koch", "circle"))
    points = cloud.points
    if len(points) == 1:
        seg_a, seg_b = points, points
    elif closed:
        seg_a, seg_b = points, np.roll(points, -1, axis=0)
    else:
        seg_a, seg_b = points[:-1], points[1:]
    lower, upper = points.min(axis=0), points.max(axis=0)
    return SegmentComplementDomain(seg_a, seg_b, lower, upper, params={"cloud": cloud.label})


def ball_polynomials(jet: BesovJet, centers: np.ndarray, radii: np.ndarray) -> PolynomialBatch:
    """
    Row i is the average over cloud points y in B(centers[i], radii[i]) of
    P(x, y) = sum_alpha (x - y)^alpha / alpha! f_alpha(y), re-expanded at centers[i].
    """
    cloud = jet.cloud
    hits = cloud.tree.query_ball_point(centers, np.broadcast_to(radii, len(centers)))
    counts = np.array([len(h) for h in hits], dtype=np.int64)
    if np.any(counts == 0):
        i = int(np.argmin(counts))
        raise EmptyBall(
            f"No cloud point within {float(np.broadcast_to(radii, len(centers))[i]):.4g} "
            f"of {centers[i].tolist()}; use a finer cloud",
            {"center": centers[i].tolist(), "cloud": cloud.label})
    rows = np.repeat(np.arange(len(centers)), counts)
    cols = np.concatenate([np.asarray(h, dtype=np.int64) for h in hits])
    weights = cloud.weights[cols]
    mass = np.bincount(rows, weights=weights, minlength=len(centers))
    diff = centers[rows] - cloud.points[cols]

    alphas = jet.alphas
    coeffs = np.zeros((len(centers), len(alphas)))
    for j, beta in enumerate(alphas):
        total = np.zeros(len(rows))
        for i, alpha in enumerate(alphas):
            if leq(beta, alpha):
                total += scaled_monomial(diff, sub(alpha, beta)) * jet.values[cols, i]
        coeffs[:, j] = np.bincount(rows, weights=weights * total, minlength=len(centers)) / mass
    return PolynomialBatch(np.asarray(centers, dtype=float), coeffs, jet.k)


def jw_extend(jet: BesovJet, root: RootBox, grid: int, j_max: int,
              complement: SegmentComplementDomain = None) -> GridField:
    """Lattice points next to D that no cube reaches fall back to a finest-scale ball centered at the point."""
    complement = cloud_complement(jet.cloud) if complement is None else complement
    origin, h, dims = lattice_for_root(root, grid)
    points = lattice_points(origin, h, dims)

    cover = whitney_decompose(complement, root, j_max)
    cubes = [c for c, side in zip(cover.cubes, cover.sides) if side <= MAX_SIDE]
    values = np.zeros(len(points))
    covered = np.zeros(len(points), dtype=bool)
    if cubes:
        centers = np.array([c.center_f for c in cubes])
        radii = BALL_FACTOR * np.array([c.diameter for c in cubes])
        batch = ball_polynomials(jet, centers, radii)
        phi = PartitionOfUnity(cubes).matrix(points).tocoo()
        contrib = phi.data * batch.evaluate_pairs(phi.col, points[phi.row])
        values += np.bincount(phi.row, weights=contrib, minlength=len(points))
        covered = np.bincount(phi.row, minlength=len(points)) > 0

    # Lattice points within two finest diagonals of D that no cube bump reaches get the
    # ball polynomial of a finest-scale ball centered at the point itself
    finest = float(root.side) / 2 ** j_max
    band = 2 * math.sqrt(root.n) * finest
    near = ~covered & (complement.boundary_distance(points) < band)
    if np.any(near):
        radius = BALL_FACTOR * math.sqrt(root.n) * finest
        batch = ball_polynomials(jet, points[near], np.full(int(near.sum()), radius))
        values[near] = batch.evaluate_pairs(np.arange(int(near.sum())), points[near])
    logger.debug(f"Jet extension from {jet.cloud.label}: {len(cubes)} cubes, "
                 f"{int(near.sum())} near-set points")
    return GridField(origin, h, values.reshape(dims), label=f"jw:{jet.cloud.label}")
