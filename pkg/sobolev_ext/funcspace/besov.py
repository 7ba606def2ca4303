import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from ..errors import OrderMismatch
from ..geometry.ahlfors import AhlforsCloud
from .fields import AnalyticField
from .multiindex import MultiIndex, add, jet_size, multi_indices, scaled_monomial

logger = logging.getLogger(__name__)


@dataclass
class BesovJet:
    """Values f_alpha at every cloud point for |alpha| <= k-1; column j is multi_indices(n, k-1)[j]."""

    cloud: AhlforsCloud
    values: np.ndarray
    k: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(len(self.cloud), -1)
        expected = jet_size(self.cloud.n, self.k)
        if self.values.shape[1] != expected:
            raise OrderMismatch(
                f"A jet of order {self.k} in R^{self.cloud.n} has {expected} components, "
                f"got {self.values.shape[1]}",
                {"k": self.k, "components": int(self.values.shape[1])})

    @property
    def n(self) -> int:
        return self.cloud.n

    @property
    def alphas(self) -> Tuple[MultiIndex, ...]:
        return multi_indices(self.n, self.k - 1)

    def component(self, alpha: MultiIndex) -> np.ndarray:
        return self.values[:, self.alphas.index(tuple(alpha))]

    def scaled(self, t: float) -> "BesovJet":
        return BesovJet(self.cloud, t * self.values, self.k)

    def plus(self, other: "BesovJet") -> "BesovJet":
        return BesovJet(self.cloud, self.values + other.values, self.k)

    def to_frame(self) -> pd.DataFrame:
        columns = {f"x{i}": self.cloud.points[:, i] for i in range(self.n)}
        for j, alpha in enumerate(self.alphas):
            columns["f_" + "".join(str(a) for a in alpha)] = self.values[:, j]
        return pd.DataFrame(columns)


def jet_of_field(u: AnalyticField, cloud: AhlforsCloud, k: int) -> BesovJet:
    values = np.stack([u.derivative(alpha, cloud.points) for alpha in multi_indices(cloud.n, k - 1)],
                      axis=1)
    return BesovJet(cloud, values, k)


def constant_jet(cloud: AhlforsCloud, value: float, k: int = 1) -> BesovJet:
    values = np.zeros((len(cloud), jet_size(cloud.n, k)))
    values[:, 0] = value
    return BesovJet(cloud, values, k)


def besov_order(s: float) -> int:
    if float(s).is_integer():
        raise OrderMismatch(f"Integer smoothness s={s} is not supported", {"s": s})
    return int(math.floor(s)) + 1


def remainders(jet: BesovJet, x_idx: np.ndarray, y_idx: np.ndarray) -> np.ndarray:
    """
    R_alpha(x, y) = f_alpha(x) - sum_{|beta| <= k-1-|alpha|} (x-y)^beta/beta! f_{alpha+beta}(y),
    shaped (pairs, components).
    """
    alphas = jet.alphas
    position = {a: j for j, a in enumerate(alphas)}
    diff = jet.cloud.points[x_idx] - jet.cloud.points[y_idx]
    out = jet.values[x_idx].copy()
    for alpha in alphas:
        j = position[alpha]
        for beta in multi_indices(jet.n, jet.k - 1 - sum(alpha)):
            out[:, j] -= scaled_monomial(diff, beta) * jet.values[y_idx, position[add(alpha, beta)]]
    return out


@dataclass
class BesovResult:
    norm: float
    lp_part: float
    shell_part: float
    shells: pd.DataFrame


def besov_norm(jet: BesovJet, s: float, p: float, j_max: int, chunk: int = 1 << 20) -> BesovResult:
    """
    sum_alpha ||f_alpha||_p + (sum_j sum_alpha 2^{j(s-|alpha|)p} 2^{jd} S_j(alpha))^{1/p}
    where S_j sums w_x w_y |R_alpha(x, y)|^p over ordered pairs with |x - y| < 2^-j.
    """
    k = besov_order(s)
    if k != jet.k:
        raise OrderMismatch(f"Smoothness s={s} needs a jet of order {k}, got {jet.k}",
                            {"s": s, "expected": k, "k": jet.k})
    if not 1 <= p < np.inf:
        raise ValueError(f"p must satisfy 1 <= p < inf, got {p}")
    cloud = jet.cloud
    weights = cloud.weights
    lp_part = float(np.sum((weights[:, None] * np.abs(jet.values) ** p).sum(axis=0) ** (1.0 / p)))

    pairs = cloud.tree.query_pairs(r=1.0, output_type="ndarray")
    orders = np.array([sum(a) for a in jet.alphas], dtype=float)
    mass = np.zeros((j_max + 1, len(orders)))
    # Both orientations; R is not symmetric in (x, y)
    for a_col, b_col in ((0, 1), (1, 0)):
        for start in range(0, len(pairs), chunk):
            block = pairs[start:start + chunk]
            x_idx, y_idx = block[:, a_col], block[:, b_col]
            dist = np.linalg.norm(cloud.points[x_idx] - cloud.points[y_idx], axis=1)
            live = (dist < 1.0) & (dist > 0)
            x_idx, y_idx, dist = x_idx[live], y_idx[live], dist[live]
            # Largest j with 2^-j > dist
            top = np.minimum(j_max, np.ceil(-np.log2(dist)).astype(int) - 1)
            contrib = (weights[x_idx] * weights[y_idx])[:, None] * \
                np.abs(remainders(jet, x_idx, y_idx)) ** p
            for col in range(len(orders)):
                mass[:, col] += np.bincount(top, weights=contrib[:, col], minlength=j_max + 1)
    # Pairs counted at their top shell reach every coarser shell too
    mass = np.cumsum(mass[::-1], axis=0)[::-1]

    j = np.arange(j_max + 1)[:, None]
    terms = 2.0 ** (j * (s - orders[None, :]) * p) * 2.0 ** (j * cloud.d) * mass
    per_shell = terms.sum(axis=1)
    shell_part = float(np.sum(per_shell)) ** (1.0 / p)
    shells = pd.DataFrame({"j": np.arange(j_max + 1), "shell_sum": per_shell,
                           "partial_norm": np.cumsum(per_shell) ** (1.0 / p)})
    logger.debug(f"Besov norm s={s} p={p}: {len(pairs)} pairs, shell part {shell_part:.6g}")
    return BesovResult(lp_part + shell_part, lp_part, shell_part, shells)


def admissible_smoothness(k: int, n: int, d: float, p: float) -> float:
    """s = k - (n - d)/p, the smoothness of traces of W^{k,p}(R^n) on a d-set."""
    return k - (n - d) / p

