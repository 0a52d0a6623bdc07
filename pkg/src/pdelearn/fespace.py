"""Tensor-product Q_k Lagrange spaces on uniform grids.

All element loops are vectorised over cells: the grid is uniform, so the
reference shape functions are evaluated once per quadrature rule and the
cell geometry enters only through the origin and the edge length ``h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .grid import Grid, QuadRule, gauss_rule


class ScalarField:
    """A function on the domain, evaluated on arrays of points ``(npts, d)``.

    ``grad`` (optional) returns the gradient with shape ``(npts, d)``;
    ``lipschitz`` is an optional bound on ``sup |grad|``.
    """

    def __init__(self, func: Callable, grad: Callable | None = None,
                 lipschitz: float | None = None, name: str = ""):
        self.func = func
        self.grad = grad
        self.lipschitz = lipschitz
        self.name = name

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.asarray(self.func(x), dtype=float)
        return np.broadcast_to(out, x.shape[:1]).copy() if out.ndim == 0 else out

    def gradient(self, x):
        if self.grad is None:
            raise ValueError(f"field {self.name or self.func!r} has no gradient")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(self.grad(x), dtype=float).reshape(x.shape)

    def __repr__(self):
        return f"ScalarField({self.name or self.func!r})"

    @classmethod
    def constant(cls, c: float) -> "ScalarField":
        c = float(c)
        return cls(lambda x: np.full(x.shape[0], c),
                   lambda x: np.zeros_like(x), lipschitz=0.0, name=f"const {c:g}")


def as_field(obj) -> ScalarField:
    if isinstance(obj, ScalarField):
        return obj
    if np.isscalar(obj):
        return ScalarField.constant(obj)
    if callable(obj):
        return ScalarField(obj)
    raise TypeError(f"cannot interpret {obj!r} as a scalar field")


def cosine_sum(d: int, scale: float = 1.0) -> ScalarField:
    """``scale * sum_i cos(pi x_i)``, the smooth Neumann eigenfunction test solution."""
    return ScalarField(
        lambda x: scale * np.cos(np.pi * x).sum(axis=1),
        lambda x: -scale * np.pi * np.sin(np.pi * x),
        lipschitz=abs(scale) * np.pi * math.sqrt(d),
        name=f"{scale:g}*sum cos(pi x_i)",
    )


# -- reference shape functions -------------------------------------------------

def lagrange_1d(k: int, t) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the ``k+1`` Lagrange polynomials on the
    equispaced nodes ``j/k`` of ``[0, 1]``; both arrays are ``(npts, k+1)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    nodes = np.linspace(0.0, 1.0, k + 1)
    diff = t[:, None] - nodes[None, :]
    vals = np.empty((t.size, k + 1))
    ders = np.zeros((t.size, k + 1))
    for a in range(k + 1):
        others = [b for b in range(k + 1) if b != a]
        denom = np.prod(nodes[a] - nodes[others])
        vals[:, a] = np.prod(diff[:, others], axis=1) / denom
        for c in others:
            rest = [b for b in others if b != c]
            ders[:, a] += np.prod(diff[:, rest], axis=1) / denom
    return vals, ders


def shape_eval(k: int, t) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product Q_k basis at reference points ``t`` of shape ``(npts, d)``.

    Returns values ``(npts, (k+1)^d)`` and gradients ``(npts, (k+1)^d, d)``.
    Local functions are ordered lexicographically in their 1D indices,
    last axis fastest.
    """
    t = np.atleast_2d(np.asarray(t, dtype=float))
    npts, d = t.shape
    v1, g1 = zip(*(lagrange_1d(k, t[:, j]) for j in range(d)))
    vals = np.ones((npts,) + (1,) * d)
    for j in range(d):
        shape = [npts] + [1] * d
        shape[j + 1] = k + 1
        vals = vals * v1[j].reshape(shape)
    grads = np.empty((npts, (k + 1) ** d, d))
    for i in range(d):
        gi = np.ones((npts,) + (1,) * d)
        for j in range(d):
            shape = [npts] + [1] * d
            shape[j + 1] = k + 1
            gi = gi * (g1[j] if j == i else v1[j]).reshape(shape)
        grads[:, :, i] = gi.reshape(npts, -1)
    return vals.reshape(npts, -1), grads


@lru_cache(maxsize=None)
def _reference_tables(k: int, quad: QuadRule):
    vals, grads = shape_eval(k, quad.points)
    vals.flags.writeable = False
    grads.flags.writeable = False
    return vals, grads


# -- the space -----------------------------------------------------------------

@dataclass(frozen=True)
class FeSpace:
    """Continuous Q_k Lagrange space on a uniform :class:`Grid`.

    Global DOFs sit on the lattice of spacing ``h/k`` and are numbered
    lexicographically (last axis fastest).
    """

    grid: Grid
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("polynomial order must be at least 1")

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def nodes_1d(self) -> int:
        return self.k * self.grid.n + 1

    @property
    def N(self) -> int:
        return self.nodes_1d**self.d

    @property
    def local_size(self) -> int:
        return (self.k + 1) ** self.d

    @cached_property
    def dof_points(self) -> np.ndarray:
        x = np.linspace(0.0, self.grid.D, self.nodes_1d)
        mesh = np.meshgrid(*([x] * self.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @cached_property
    def cell_dofs(self) -> np.ndarray:
        """Global DOF indices of each cell, shape ``(ncells, (k+1)^d)``."""
        k, d = self.k, self.d
        cmi = self.grid.cell_multi_index()
        loc = np.stack(np.unravel_index(np.arange(self.local_size), (k + 1,) * d), axis=-1)
        gmi = k * cmi[:, None, :] + loc[None, :, :]
        return np.ravel_multi_index(tuple(np.moveaxis(gmi, -1, 0)), (self.nodes_1d,) * d)

    def quad_points(self, quad: QuadRule) -> np.ndarray:
        """Physical quadrature points of every cell, ``(ncells, nq, d)``."""
        origin = self.grid.cell_origin().astype(float)
        return origin[:, None, :] + self.grid.h * quad.points[None, :, :]

    def field_at_quad(self, f, quad: QuadRule) -> np.ndarray:
        f = as_field(f)
        pts = self.quad_points(quad)
        return f(pts.reshape(-1, self.d)).reshape(pts.shape[:2])

    def values_at_quad(self, v, quad: QuadRule) -> np.ndarray:
        vals, _ = _reference_tables(self.k, quad)
        return np.asarray(v)[self.cell_dofs] @ vals.T

    def gradients_at_quad(self, v, quad: QuadRule) -> np.ndarray:
        _, grads = _reference_tables(self.k, quad)
        return np.einsum("ca,qai->cqi", np.asarray(v)[self.cell_dofs], grads) / self.grid.h

    def default_quad(self) -> QuadRule:
        return gauss_rule(self.k + 1, self.d)

    def error_quad(self) -> QuadRule:
        return gauss_rule(error_quad_points(self.k), self.d)

    def _scatter(self, local: np.ndarray) -> sp.csr_matrix:
        cd = self.cell_dofs
        nl = self.local_size
        rows = np.repeat(cd, nl, axis=1).ravel()
        cols = np.tile(cd, (1, nl)).ravel()
        A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(self.N, self.N)).tocsr()
        A.sum_duplicates()
        return A


def build_space(grid: Grid, k: int) -> FeSpace:
    return FeSpace(grid, k)


def error_quad_points(k: int) -> int:
    """Points per dimension for error norms: exact to degree ``k^2`` at least,
    and never fewer than ``k + 2``."""
    return max(math.ceil((k * k + 1) / 2), k + 2)


# -- assembly ------------------------------------------------------------------

def assemble_stiffness(space: FeSpace, alpha=1.0, quad: QuadRule | None = None) -> sp.csr_matrix:
    """Matrix of ``(w, v) -> int alpha grad w . grad v``."""
    quad = quad or space.default_quad()
    _, grads = _reference_tables(space.k, quad)
    coef = space.field_at_quad(alpha, quad) * quad.weights[None, :]
    S = np.einsum("qai,qbi->qab", grads, grads)
    h, d = space.grid.h, space.d
    local = np.einsum("cq,qab->cab", coef, S) * h ** (d - 2)
    return _symmetric(space._scatter(local))


def assemble_mass(space: FeSpace, sigma=1.0, quad: QuadRule | None = None) -> sp.csr_matrix:
    """Matrix of ``(w, v) -> int sigma w v``."""
    quad = quad or space.default_quad()
    vals, _ = _reference_tables(space.k, quad)
    coef = space.field_at_quad(sigma, quad) * quad.weights[None, :]
    P = vals[:, :, None] * vals[:, None, :]
    local = np.einsum("cq,qab->cab", coef, P) * space.grid.h**space.d
    return _symmetric(space._scatter(local))


def assemble_load(space: FeSpace, f, quad: QuadRule | None = None) -> np.ndarray:
    """Vector of ``int f phi_i``."""
    quad = quad or space.default_quad()
    vals, _ = _reference_tables(space.k, quad)
    fq = space.field_at_quad(f, quad) * quad.weights[None, :]
    local = fq @ vals * space.grid.h**space.d
    return np.bincount(space.cell_dofs.ravel(), weights=local.ravel(), minlength=space.N)


def _symmetric(A: sp.csr_matrix) -> sp.csr_matrix:
    # guards against roundoff asymmetry from duplicate summation order
    diff = A - A.T
    if diff.nnz and np.max(np.abs(diff.data)) > 0:
        A = ((A + A.T) * 0.5).tocsr()
    return A


# -- functions in the space ----------------------------------------------------

def interpolate(space: FeSpace, g) -> np.ndarray:
    """Nodal interpolant: coefficient ``i`` is ``g`` at DOF point ``i``."""
    return as_field(g)(space.dof_points)


def evaluate(space: FeSpace, v, points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cell, local = space.grid.locate(points)
    vals, _ = shape_eval(space.k, local)
    return np.einsum("pa,pa->p", vals, np.asarray(v)[space.cell_dofs[cell]])


def evaluate_gradient(space: FeSpace, v, points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cell, local = space.grid.locate(points)
    _, grads = shape_eval(space.k, local)
    return np.einsum("pai,pa->pi", grads, np.asarray(v)[space.cell_dofs[cell]]) / space.grid.h


def l2_error(space: FeSpace, v, g=0.0, quad: QuadRule | None = None) -> float:
    """``||v_h - g||_{L2}`` by cellwise quadrature (default: :func:`error_quad_points`)."""
    quad = quad or space.error_quad()
    diff = space.values_at_quad(v, quad) - space.field_at_quad(g, quad)
    return math.sqrt(space.grid.h**space.d * float(np.sum(diff**2 @ quad.weights)))


def h1_seminorm_error(space: FeSpace, v, g=None, quad: QuadRule | None = None) -> float:
    """``|v_h - g|_{H1}``; ``g`` must carry a gradient (``None`` means zero)."""
    quad = quad or space.error_quad()
    gh = space.gradients_at_quad(v, quad)
    if g is not None:
        pts = space.quad_points(quad)
        gh = gh - as_field(g).gradient(pts.reshape(-1, space.d)).reshape(gh.shape)
    sq = np.sum(gh**2, axis=2)
    return math.sqrt(space.grid.h**space.d * float(np.sum(sq @ quad.weights)))


def l2_norm(space: FeSpace, v, quad: QuadRule | None = None) -> float:
    return l2_error(space, v, 0.0, quad)


def prolongation(coarse: FeSpace, fine: FeSpace) -> sp.csr_matrix:
    """Matrix embedding ``coarse`` into ``fine`` by nodal interpolation.

    Exact when the coarse space is a subspace of the fine one (nested grids,
    same order); column ``j`` holds the coarse basis function ``j`` sampled at
    the fine DOF points.
    """
    pts = fine.dof_points
    cell, local = coarse.grid.locate(pts)
    vals, _ = shape_eval(coarse.k, local)
    rows = np.repeat(np.arange(fine.N), coarse.local_size)
    P = sp.csr_matrix((vals.ravel(), (rows, coarse.cell_dofs[cell].ravel())),
                      shape=(fine.N, coarse.N))
    P.data[np.abs(P.data) < 1e-14] = 0.0
    P.eliminate_zeros()
    return P
