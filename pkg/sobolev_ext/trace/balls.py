from functools import lru_cache
from math import gamma, pi
from typing import Tuple

import numpy as np

from ..funcspace.quadrature import gauss_legendre


@lru_cache(maxsize=None)
def ball_quadrature(n: int, count: int = 8) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes in the unit ball of R^n and weights summing to 1, so that
    sum_i w_i g(x + r xi_i) is the average of g over B(x, r). Exact for
    polynomials of degree < 2*count in n <= 3.
    """
    if n == 1:
        t, w = gauss_legendre(-1.0, 1.0, count)
        return t[:, None], w / w.sum()
    if n == 2:
        rho, w_rho = gauss_legendre(0.0, 1.0, count)
        angles = 2 * np.pi * np.arange(2 * count) / (2 * count)
        R, A = np.meshgrid(rho, angles, indexing="ij")
        W = np.outer(w_rho * rho, np.ones(len(angles)))
        nodes = np.stack([(R * np.cos(A)).ravel(), (R * np.sin(A)).ravel()], axis=1)
        return nodes, W.ravel() / W.sum()
    if n == 3:
        rho, w_rho = gauss_legendre(0.0, 1.0, count)
        cos_t, w_t = gauss_legendre(-1.0, 1.0, count)
        angles = 2 * np.pi * np.arange(2 * count) / (2 * count)
        R, C, A = np.meshgrid(rho, cos_t, angles, indexing="ij")
        S = np.sqrt(1 - C ** 2)
        nodes = np.stack([(R * S * np.cos(A)).ravel(), (R * S * np.sin(A)).ravel(), (R * C).ravel()],
                         axis=1)
        W = (w_rho * rho ** 2)[:, None, None] * w_t[None, :, None] * np.ones(len(angles))[None, None, :]
        return nodes, W.ravel() / W.sum()
    # Midpoints of a count^n lattice clipped to the ball
    axis = -1 + (np.arange(2 * count) + 0.5) / count
    mesh = np.stack([m.ravel() for m in np.meshgrid(*([axis] * n), indexing="ij")], axis=1)
    nodes = mesh[np.linalg.norm(mesh, axis=1) < 1]
    return nodes, np.full(len(nodes), 1.0 / len(nodes))


def ball_volume(n: int, r: float) -> float:
    return pi ** (n / 2) / gamma(n / 2 + 1) * r ** n
