"""
Bilinear (Q1) finite elements on the staircase subdomain of a uniform grid.
Active cells are closed grid cells inside the closure of the domain; nodes
within distance h of the Dirichlet part D carry the value of the lifting
(0 by default) and are eliminated.
"""
import logging
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from ..errors import EmptySpace
from ..funcspace.fields import GridField
from ..funcspace.quadrature import GAUSS2
from ..geometry.boundary import BoundaryPart
from ..geometry.domains import DomainOracle
from .tensors import CoefficientTensor

logger = logging.getLogger(__name__)


def corner_offsets(n: int) -> np.ndarray:
    return np.array(list(product((0, 1), repeat=n)), dtype=np.int64)


def q1_basis(xi: np.ndarray, offsets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Values (q, 2^n) and reference gradients (q, 2^n, n) of the Q1 basis at xi in [0, 1]^n."""
    factors = np.where(offsets[None] == 1, xi[:, None, :], 1 - xi[:, None, :])
    slopes = np.where(offsets[None] == 1, 1.0, -1.0) * np.ones_like(factors)
    n = xi.shape[1]
    grads = np.empty_like(factors)
    for d in range(n):
        grads[..., d] = slopes[..., d] * np.prod(np.delete(factors, d, axis=2), axis=2)
    return factors.prod(axis=2), grads


def gauss_points(n: int) -> np.ndarray:
    return np.array(list(product(GAUSS2, repeat=n))) if n else np.zeros((1, 0))


class FemSpace:
    def __init__(self, oracle: DomainOracle, lower: Sequence[float], h: float, dims: Sequence[int],
                 dirichlet: BoundaryPart, M: int = 1):
        self.oracle = oracle
        self.lower = np.asarray(lower, dtype=float)
        self.h = float(h)
        self.dims = tuple(int(d) for d in dims)
        self.dirichlet = dirichlet
        self.M = M
        n = self.n
        self.offsets = corner_offsets(n)
        self.node_dims = tuple(d + 1 for d in self.dims)

        cells = np.stack([m.reshape(-1) for m in np.meshgrid(*[np.arange(d) for d in self.dims],
                                                             indexing="ij")], axis=1)
        lowers = self.lower + cells * self.h
        active = oracle.box_in_closure(lowers, lowers + self.h)
        self.cells = cells[active]
        if len(self.cells) == 0:
            raise EmptySpace(f"No grid cell of size {self.h:g} lies inside {oracle.kind}",
                             {"h": self.h, "domain": oracle.kind})

        corners = (self.cells[:, None, :] + self.offsets[None]).reshape(-1, n)
        flat = np.ravel_multi_index(tuple(corners.T), self.node_dims).reshape(len(self.cells), -1)
        self.node_ids = np.unique(flat)
        self.cell_nodes = np.searchsorted(self.node_ids, flat)
        self.nodes = self.lower + np.stack(np.unravel_index(self.node_ids, self.node_dims), axis=1) * self.h

        self.faces = self._boundary_faces(active.reshape(self.dims))
        self.boundary_nodes = np.unique(np.concatenate(
            [self.face_nodes(axis, side, rows) for axis, side, rows in self.faces]))
        self.constrained = self._constrained_nodes()
        self.free = np.setdiff1d(np.arange(len(self.nodes)), self.constrained)
        if len(self.free) == 0:
            raise EmptySpace("Every node is constrained", {"h": self.h, "nodes": len(self.nodes)})
        logger.debug(f"FemSpace on {oracle.kind}: {len(self.cells)} cells, {len(self.nodes)} nodes, "
                     f"{len(self.constrained)} constrained")

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.h * np.array(self.dims)

    @property
    def dof_count(self) -> int:
        return len(self.nodes) * self.M

    def dofs(self, nodes: np.ndarray) -> np.ndarray:
        return (np.asarray(nodes)[:, None] * self.M + np.arange(self.M)[None, :]).reshape(-1)

    def _boundary_faces(self, active_grid: np.ndarray):
        """(axis, side, cell rows) for cell faces whose neighbour cell is inactive."""
        out = []
        for axis in range(self.n):
            for side in (0, 1):
                neighbours = self.cells.copy()
                neighbours[:, axis] += 1 if side else -1
                within = (neighbours[:, axis] >= 0) & (neighbours[:, axis] < self.dims[axis])
                live = np.zeros(len(neighbours), dtype=bool)
                live[within] = active_grid[tuple(neighbours[within].T)]
                out.append((axis, side, np.flatnonzero(~live)))
        return out

    def face_nodes(self, axis: int, side: int, rows: np.ndarray) -> np.ndarray:
        local = np.flatnonzero(self.offsets[:, axis] == side)
        return self.cell_nodes[rows][:, local].reshape(-1)

    def _constrained_nodes(self) -> np.ndarray:
        if self.dirichlet.is_empty:
            return np.zeros(0, dtype=np.int64)
        if self.dirichlet.covers(self.oracle):
            return self.boundary_nodes
        near = self.dirichlet.distance(self.nodes[self.boundary_nodes]) < self.h
        return self.boundary_nodes[near]

    def nodal_field(self, values: np.ndarray, label: str = "") -> GridField:
        """Nodal values as a GridField whose cell centers are the grid nodes."""
        values = np.asarray(values, dtype=float).reshape(len(self.nodes), self.M)
        full = np.zeros((int(np.prod(self.node_dims)), self.M))
        full[self.node_ids] = values
        mask = np.zeros(int(np.prod(self.node_dims)), dtype=bool)
        mask[self.node_ids] = True
        shape = self.node_dims + ((self.M,) if self.M > 1 else ())
        return GridField(self.lower - self.h / 2, self.h, full.reshape(shape), self.M,
                         mask.reshape(self.node_dims), label)

    def interpolate(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Nodal interpolant, flattened by dof."""
        return np.asarray(func(self.nodes), dtype=float).reshape(-1)


def space_for(oracle: DomainOracle, grid: int, dirichlet: BoundaryPart, M: int = 1,
              box: Union[Tuple[Sequence[float], Sequence[float]], None] = None,
              offset: float = 0.0) -> FemSpace:
    """`grid` cells along the longest box side; `offset` shifts the grid by a fraction of h."""
    lower, upper = box if box is not None else oracle.bbox
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    h = float(np.max(upper - lower)) / grid
    start = lower - offset * h
    dims = np.ceil((upper - start) / h - 1e-9).astype(int)
    return FemSpace(oracle, start, h, dims, dirichlet, M)


@dataclass
class WeakProblem:
    """
    Find u with u = lifting on constrained nodes and
    sum int a d_beta u_j d_alpha v_i = int f v + int_{boundary minus D} g v.
    """

    tensor: CoefficientTensor
    space: FemSpace
    f: Union[Callable[[np.ndarray], np.ndarray], None] = None
    g: Union[Callable[[np.ndarray, np.ndarray], np.ndarray], None] = None
    lifting: Union[Callable[[np.ndarray], np.ndarray], None] = None


@dataclass
class System:
    K: sparse.csr_matrix
    F: np.ndarray
    space: FemSpace
    lifting: np.ndarray
    compatibility: Union[np.ndarray, None]

    @property
    def free_dofs(self) -> np.ndarray:
        return self.space.dofs(self.space.free)

    @property
    def constrained_dofs(self) -> np.ndarray:
        return self.space.dofs(self.space.constrained)

    def reduced(self) -> Tuple[sparse.csr_matrix, np.ndarray]:
        free, fixed = self.free_dofs, self.constrained_dofs
        K_ff = self.K[free][:, free]
        rhs = self.F[free].copy()
        if len(fixed):
            rhs -= self.K[free][:, fixed] @ self.lifting[fixed]
        return K_ff.tocsr(), rhs


def _components(values: np.ndarray, count: int, M: int) -> np.ndarray:
    return np.asarray(values, dtype=float).reshape(count, M)


def assemble(problem: WeakProblem, check: bool = True) -> System:
    space, tensor = problem.space, problem.tensor
    n, M, h = space.n, space.M, space.h
    if tensor.M != M or tensor.n != n:
        raise ValueError(f"Tensor of shape (M={tensor.M}, n={tensor.n}) on a space with M={M}, n={n}")
    if check:
        tensor.check_ellipticity((space.lower, space.upper))

    gp = gauss_points(n)
    w = h ** n / len(gp)
    phi, ref_grads = q1_basis(gp, space.offsets)
    grads = ref_grads / h
    cells = len(space.cells)
    x = (space.lower + (space.cells[:, None, :] + gp[None]) * h).reshape(-1, n)

    A = tensor(x).reshape(cells, len(gp), M, n, M, n)
    Ke = w * np.einsum('cgiljm,gbm,gal->caibj', A, grads, grads)
    dof = space.cell_nodes[:, :, None] * M + np.arange(M)[None, None, :]
    rows = np.broadcast_to(dof[:, :, :, None, None], Ke.shape)
    cols = np.broadcast_to(dof[:, None, None, :, :], Ke.shape)
    K = sparse.coo_matrix((Ke.ravel(), (rows.ravel(), cols.ravel())),
                          shape=(space.dof_count, space.dof_count)).tocsr()

    F = np.zeros(space.dof_count)
    if problem.f is not None:
        fvals = _components(problem.f(x), cells * len(gp), M).reshape(cells, len(gp), M)
        Fe = w * np.einsum('cgi,ga->cai', fvals, phi)
        F += np.bincount(dof.ravel(), weights=Fe.ravel(), minlength=space.dof_count)
    if problem.g is not None:
        F += _boundary_load(space, problem.g)

    lifting = np.zeros(space.dof_count)
    fixed = space.constrained
    if problem.lifting is not None and len(fixed):
        values = _components(problem.lifting(space.nodes[fixed]), len(fixed), M)
        lifting[space.dofs(fixed)] = values.reshape(-1)

    compatibility = None
    if space.dirichlet.is_empty:
        compatibility = F.reshape(-1, M).sum(axis=0)
    logger.debug(f"Assembled {tensor.name} on {cells} cells: {K.nnz} nonzeros")
    return System(K, F, space, lifting, compatibility)


def _boundary_load(space: FemSpace, g: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """int over boundary faces outside the D-collar of g(x, normal) times the basis."""
    n, M, h = space.n, space.M, space.h
    out = np.zeros(space.dof_count)
    if space.dirichlet.covers(space.oracle):
        return out
    face_gp = gauss_points(n - 1)
    w = h ** (n - 1) / len(face_gp)
    for axis, side, rows in space.faces:
        if len(rows) == 0:
            continue
        ref = np.insert(face_gp, axis, float(side), axis=1)
        phi, _ = q1_basis(ref, space.offsets)
        # Faces lying wholly in the D-collar carry no load
        fixed = np.isin(space.face_nodes(axis, side, rows), space.constrained)
        rows = rows[~fixed.reshape(len(rows), -1).all(axis=1)]
        if len(rows) == 0:
            continue
        x = (space.lower + (space.cells[rows][:, None, :] + ref[None]) * h).reshape(-1, n)
        normal = np.zeros(n)
        normal[axis] = 1.0 if side else -1.0
        gvals = _components(g(x, np.tile(normal, (len(x), 1))), len(x), M).reshape(len(rows), len(ref), M)
        Fe = w * np.einsum('cgi,ga->cai', gvals, phi)
        dof = space.cell_nodes[rows][:, :, None] * M + np.arange(M)[None, None, :]
        out += np.bincount(dof.ravel(), weights=Fe.ravel(), minlength=space.dof_count)
    return out


def basis_norms(space: FemSpace) -> np.ndarray:
    """W^{1,2} norm of every nodal basis function, per dof."""
    n, h = space.n, space.h
    gp = gauss_points(n)
    w = h ** n / len(gp)
    phi, ref_grads = q1_basis(gp, space.offsets)
    local = w * ((phi ** 2).sum(axis=0) + (ref_grads ** 2).sum(axis=(0, 2)) / h ** 2)
    per_node = np.bincount(space.cell_nodes.ravel(),
                           weights=np.broadcast_to(local, space.cell_nodes.shape).ravel(),
                           minlength=len(space.nodes))
    return np.repeat(np.sqrt(per_node), space.M)
