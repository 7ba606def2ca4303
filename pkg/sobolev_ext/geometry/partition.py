"""
Smooth partition of unity subordinate to the 17/16-dilates of a cube family.

Each cube carries a tensor bump b_Q equal to 1 on Q and vanishing outside
(17/16)Q; phi_Q = b_Q / sum b. Per axis the bump is the profile
exp(1 - 1/(1 - t^2)) composed with a flat smooth step, so it is C-infinity
and flat at both ends of the transition layer.
"""
import logging
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.spatial import cKDTree

from ..errors import DegenerateCover
from .cubes import DyadicCube

logger = logging.getLogger(__name__)

DILATION = 17.0 / 16.0


def bump_profile(t: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - t^2)) on [0, 1), clamped to 0 from t = 1 on."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    out = np.zeros_like(t)
    live = t < 1.0
    out[live] = np.exp(1.0 - 1.0 / (1.0 - t[live] ** 2))
    return out


def smooth_step(s: np.ndarray) -> np.ndarray:
    """0 for s <= 0, 1 for s >= 1, C-infinity with all derivatives vanishing at both ends."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide='ignore', over='ignore'):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def axis_bump(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Tensor bump of boxes [lower, upper] with a margin of side/32 per face."""
    side = upper - lower
    margin = side * (DILATION - 1.0) / 2
    outside = np.maximum(0.0, np.maximum(lower - x, x - upper)) / margin
    return np.prod(bump_profile(smooth_step(outside)), axis=-1)


class PartitionOfUnity:
    """
    Evaluable family {phi_Q}. `matrix(points)` returns the sparse
    (points x cubes) matrix of phi values.
    """

    def __init__(self, cubes: Sequence[DyadicCube]):
        self.cubes: List[DyadicCube] = list(cubes)
        if self.cubes:
            self.lowers = np.array([c.lower_f for c in self.cubes])
            self.sides = np.array([c.side_f for c in self.cubes])
            self.n = self.cubes[0].n
        else:
            self.lowers = np.zeros((0, 0))
            self.sides = np.zeros(0)
            self.n = 0
        self.uppers = self.lowers + self.sides[:, None] if self.cubes else self.lowers
        self._by_side: Dict[float, np.ndarray] = {}
        for side in np.unique(self.sides):
            self._by_side[float(side)] = np.flatnonzero(self.sides == side)
        self._trees = {
            side: cKDTree(self.lowers[idx] + side / 2) for side, idx in self._by_side.items()}

    def __len__(self):
        return len(self.cubes)

    def bumps(self, points: np.ndarray) -> sparse.csr_matrix:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        rows: List[np.ndarray] = []
        cols: List[np.ndarray] = []
        vals: List[np.ndarray] = []
        for side, idx in self._by_side.items():
            reach = side * DILATION / 2
            hits = self._trees[side].query_ball_point(points, r=reach, p=np.inf)
            counts = np.array([len(h) for h in hits])
            if counts.sum() == 0:
                continue
            r = np.repeat(np.arange(len(points)), counts)
            local = np.concatenate([np.asarray(h, dtype=np.int64) for h in hits if h])
            c = idx[local]
            v = axis_bump(points[r], self.lowers[c], self.uppers[c])
            live = v > 0
            rows.append(r[live])
            cols.append(c[live])
            vals.append(v[live])
        if not rows:
            return sparse.csr_matrix((len(points), len(self.cubes)))
        return sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(len(points), len(self.cubes))).tocsr()

    def matrix(self, points: np.ndarray, strict: bool = True) -> sparse.csr_matrix:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        b = self.bumps(points)
        total = np.asarray(b.sum(axis=1)).ravel()
        if strict:
            in_union = self.in_union(points)
            degenerate = in_union & ~(total > 0)
            if np.any(degenerate):
                i = int(np.argmax(degenerate))
                raise DegenerateCover(
                    f"Bump sum vanishes at {points[i].tolist()} inside the cube union",
                    {"point": points[i].tolist()})
        scale = np.divide(1.0, total, out=np.zeros_like(total), where=total > 0)
        return sparse.diags(scale) @ b

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Dense (points x cubes) phi values; for small families and tests."""
        return self.matrix(points).toarray()

    def in_union(self, points: np.ndarray, dilation: float = 1.0) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(len(points), dtype=bool)
        for side, idx in self._by_side.items():
            reach = side * dilation / 2
            hits = self._trees[side].query_ball_point(points, r=reach, p=np.inf)
            out |= np.array([len(h) > 0 for h in hits])
        return out

    def covered(self, points: np.ndarray) -> np.ndarray:
        return self.in_union(points, DILATION)

    def layer_samples(self, q: int, count: int) -> np.ndarray:
        """Tensor grid over (17/16)Q, `count` points across each transition layer plus the center."""
        lower, side = self.lowers[q], self.sides[q]
        margin = side * (DILATION - 1.0) / 2
        u = np.linspace(0.0, 1.0, count)
        axes = [np.concatenate([lo - margin * u[::-1], [lo + side / 2], lo + side + margin * u])
                for lo in lower]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def derivative_scales(self, indices: Union[Sequence[int], None] = None,
                          layer_samples: Union[int, None] = None,
                          step: float = 1.0 / 512) -> pd.DataFrame:
        """
        Sampled central differences of phi_Q up to second order.

        For each cube returns the maxima over the samples of |phi_Q|,
        l(Q) |d phi_Q| and l(Q)^2 |d^2 phi_Q| (pure and mixed), the
        difference step being `step` times the side. Bounded scaled values
        across levels are the C_alpha l(Q)^-|alpha| estimates.
        """
        indices = range(len(self.cubes)) if indices is None else indices
        if layer_samples is None:
            layer_samples = 7 if self.n <= 2 else 4
        pairs = [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]
        rows = []
        for q in indices:
            side = float(self.sides[q])
            h = step * side
            eye = np.eye(self.n) * h
            shifts = [np.zeros(self.n)] + [s * e for e in eye for s in (1, -1)]
            for i, j in pairs:
                shifts += [si * eye[i] + sj * eye[j] for si in (1, -1) for sj in (1, -1)]

            points = self.layer_samples(q, layer_samples)
            # phi_Q is only a partition on the union of the cubes
            points = points[self.in_union(points)]
            stencil = np.concatenate([points + s for s in shifts])
            phi = self.matrix(stencil, strict=False)[:, q].toarray().ravel()
            phi = phi.reshape(len(shifts), len(points))

            f0 = phi[0]
            first, second = [], []
            for a in range(self.n):
                fp, fm = phi[1 + 2 * a], phi[2 + 2 * a]
                first.append(np.abs(fp - fm) / (2 * h))
                second.append(np.abs(fp - 2 * f0 + fm) / h ** 2)
            base = 1 + 2 * self.n
            for k in range(len(pairs)):
                pp, pm, mp, mm = phi[base + 4 * k:base + 4 * k + 4]
                second.append(np.abs(pp - pm - mp + mm) / (4 * h ** 2))

            rows.append({"cube": int(q), "level": self.cubes[q].level, "side": side,
                         "phi": float(np.max(np.abs(f0))),
                         "d1": side * float(np.max(first)),
                         "d2": side ** 2 * float(np.max(second))})
        return pd.DataFrame(rows, columns=["cube", "level", "side", "phi", "d1", "d2"])


def partition_of_unity(cubes: Sequence[DyadicCube]) -> PartitionOfUnity:
    return PartitionOfUnity(cubes)
