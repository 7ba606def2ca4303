"""
Restriction of fields to d-sets through ball averages.

The value of d^alpha v at a cloud point x is estimated from averages over
B(x, r) at the two finest radii of a dyadic ladder. Full balls have even
error in r, half balls at a boundary have first-order error; the estimate
extrapolates accordingly and keeps |A(r/2) - A(r)| as the residual.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
import pandas as pd

from ..config import Config
from ..errors import OrderMismatch, UnderresolvedBall
from ..funcspace.besov import BesovJet
from ..funcspace.fields import AnalyticField, GridField
from ..funcspace.multiindex import factorial, exact_order, monomial, multi_indices
from ..geometry.ahlfors import AhlforsCloud
from ..geometry.domains import DomainOracle
from .balls import ball_quadrature, ball_volume

logger = logging.getLogger(__name__)

Field = Union[AnalyticField, GridField]

# Cloud points per averaging batch
POINT_CHUNK = 512


@dataclass
class TraceReport:
    jet: BesovJet
    residuals: np.ndarray
    radii: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0

    def to_frame(self) -> pd.DataFrame:
        frame = self.jet.to_frame()
        for j, alpha in enumerate(self.jet.alphas):
            frame["residual_" + "".join(str(a) for a in alpha)] = self.residuals[:, j]
        return frame


def check_radii(radii: Sequence[float]) -> np.ndarray:
    """Sorted decreasing; consecutive radii must halve."""
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    if len(radii) < 2:
        raise ValueError(f"Need at least two radii, got {radii.tolist()}")
    if np.any(radii <= 0) or not np.allclose(radii[:-1] / radii[1:], 2.0, rtol=1e-9):
        raise ValueError(f"Radii must form a dyadic ladder, got {radii.tolist()}")
    return radii


def derivative_evaluator(v: Field, k: int) -> Callable[[np.ndarray], np.ndarray]:
    """Points (m, n) -> (m, J) values of d^alpha v, |alpha| <= k-1."""
    alphas = multi_indices(v.n, k - 1)
    if isinstance(v, GridField):
        interpolators = [v.with_values(v.derivative(alpha)).interpolator() for alpha in alphas]
        return lambda x: np.stack([f(x) for f in interpolators], axis=1)
    return lambda x: np.stack([v.derivative(alpha, x) for alpha in alphas], axis=1)


def check_resolution(v: Field, r: float) -> None:
    if not isinstance(v, GridField):
        return
    cells = ball_volume(v.n, r) / v.cell_volume
    if r < 4 * v.h or cells < 2 ** v.n:
        raise UnderresolvedBall(
            f"Ball radius {r:g} spans {cells:.1f} cells of size {v.h:g}; need r >= 4h",
            {"r": r, "h": v.h, "cells": cells})


def ball_averages(evaluate: Callable[[np.ndarray], np.ndarray], centers: np.ndarray, r: float,
                  nodes: np.ndarray, weights: np.ndarray,
                  keep: Union[Callable[[np.ndarray], np.ndarray], None] = None) -> np.ndarray:
    """Averages over B(x, r), or over its part where `keep` holds."""
    out = []
    for start in range(0, len(centers), POINT_CHUNK):
        block = centers[start:start + POINT_CHUNK]
        points = (block[:, None, :] + r * nodes[None, :, :]).reshape(-1, block.shape[1])
        values = evaluate(points).reshape(len(block), len(nodes), -1)
        w = np.broadcast_to(weights, (len(block), len(nodes)))
        if keep is not None:
            w = w * keep(points).reshape(len(block), len(nodes))
        mass = w.sum(axis=1)
        if np.any(mass <= 0):
            i = int(np.argmin(mass))
            raise UnderresolvedBall(
                f"No quadrature node of B({block[i].tolist()}, {r:g}) lies in the domain",
                {"center": block[i].tolist(), "r": r})
        out.append(np.einsum('pq,pqj->pj', w, values) / mass[:, None])
    return np.concatenate(out) if out else np.zeros((0, 0))


def restrict_jet(v: Field, cloud: AhlforsCloud, k: int, radii: Sequence[float],
                 count: int = 8) -> TraceReport:
    """f_alpha(x) = (4 A(r/2) - A(r)) / 3 at the two finest radii."""
    radii = check_radii(radii)
    coarse, fine = radii[-2], radii[-1]
    check_resolution(v, fine)
    nodes, weights = ball_quadrature(cloud.n, count)
    evaluate = derivative_evaluator(v, k)
    a_coarse = ball_averages(evaluate, cloud.points, coarse, nodes, weights)
    a_fine = ball_averages(evaluate, cloud.points, fine, nodes, weights)
    jet = BesovJet(cloud, (4 * a_fine - a_coarse) / 3, k)
    report = TraceReport(jet, np.abs(a_fine - a_coarse), radii)
    logger.debug(f"Trace of order {k} on {cloud.label}: max residual {report.max_residual:.3g}")
    return report


def interior_restrict_jet(u: Field, oracle: DomainOracle, cloud: AhlforsCloud, k: int,
                          radii: Sequence[float], count: int = 8) -> TraceReport:
    """One-sided averages over the domain part of each ball; f = 2 A(r/2) - A(r)."""
    radii = check_radii(radii)
    coarse, fine = radii[-2], radii[-1]
    check_resolution(u, fine)
    nodes, weights = ball_quadrature(cloud.n, count)
    evaluate = derivative_evaluator(u, k)
    a_coarse = ball_averages(evaluate, cloud.points, coarse, nodes, weights, oracle.contains)
    a_fine = ball_averages(evaluate, cloud.points, fine, nodes, weights, oracle.contains)
    jet = BesovJet(cloud, 2 * a_fine - a_coarse, k)
    return TraceReport(jet, np.abs(a_fine - a_coarse), radii)


def trace_vanishes(report: TraceReport, h: float, constant: float = 1.0, floor: float = None) -> bool:
    """Every jet component at most max(floor, C h^(1/2))."""
    floor = Config.trace_floor if floor is None else floor
    return bool(np.all(np.abs(report.jet.values) <= max(floor, constant * math.sqrt(h))))


def normal_derivatives(jet: BesovJet, normals: np.ndarray, m: int) -> np.ndarray:
    """Column j is sum_{|alpha| = j} j!/alpha! nu^alpha f_alpha, j < m."""
    if jet.k < m:
        raise OrderMismatch(f"A jet of order {jet.k} has no normal derivatives up to order {m - 1}",
                            {"k": jet.k, "m": m})
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    if normals.shape != (len(jet.cloud), jet.n):
        raise ValueError(f"Expected {len(jet.cloud)} normals in R^{jet.n}, got shape {normals.shape}")
    if not np.allclose(np.linalg.norm(normals, axis=1), 1.0, rtol=0, atol=1e-12):
        raise ValueError("Normals must have unit length")
    out = np.zeros((len(jet.cloud), m))
    for j in range(m):
        for alpha in exact_order(jet.n, j):
            coefficient = math.factorial(j) / factorial(alpha)
            out[:, j] += coefficient * monomial(normals, alpha) * jet.component(alpha)
    return out
