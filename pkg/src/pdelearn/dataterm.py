"""Scattered data on averaging boxes and the data bilinear form.

A data site ``p_i`` carries the box ``B_i = p_i + l [-1/2, 1/2]^d``.  The
form ``b(w, v) = sum_i |B_i| avg_{B_i} w avg_{B_i} v`` is represented by
the averaging matrix ``G`` (row ``i`` maps FE coefficients to the box
average) and the box volumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .fespace import FeSpace, as_field, lagrange_1d
from .grid import box_rule, gauss_rule_1d

GENERATOR = "numpy.random.PCG64"
MODES = ("exact_average", "point_value")


@dataclass(frozen=True, eq=False)
class DataCloud:
    points: np.ndarray
    l_hat: float
    D: float = 1.0
    seed: int | None = None
    generator: str = GENERATOR

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def lower(self) -> np.ndarray:
        return self.points - 0.5 * self.l_hat

    @property
    def upper(self) -> np.ndarray:
        return self.points + 0.5 * self.l_hat

    @property
    def box_volume(self) -> float:
        return self.l_hat**self.d

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.m, self.box_volume)

    @property
    def box_diameter(self) -> float:
        return self.l_hat * math.sqrt(self.d)


def sample_points(m: int, d: int, l_hat: float, D: float = 1.0, seed: int = 0) -> DataCloud:
    """``m`` uniform sites in ``[l/2, D - l/2]^d`` so that every box lies in the domain."""
    if m < 1:
        raise ValueError("need at least one data point")
    if not 0 <= l_hat < D:
        raise ValueError(f"box edge must lie in [0, D), got {l_hat}")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.5 * l_hat, D - 0.5 * l_hat, size=(m, d))
    return DataCloud(pts, float(l_hat), float(D), seed)


def tiled_cloud(d: int, nu: int, D: float = 1.0) -> DataCloud:
    """``nu^d`` congruent boxes of edge ``D/nu`` tiling the cube exactly."""
    c = (np.arange(nu) + 0.5) * D / nu
    mesh = np.meshgrid(*([c] * d), indexing="ij")
    return DataCloud(np.stack([g.ravel() for g in mesh], axis=-1), D / nu, D)


def cloud_from_boxes(points, l_hat: float, D: float = 1.0) -> DataCloud:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return DataCloud(pts, float(l_hat), float(D))


@dataclass(frozen=True, eq=False)
class AveragingOperator:
    """Sparse ``m x N`` matrix of box averages and the box volumes."""

    G: sp.csr_matrix
    weights: np.ndarray

    @property
    def m(self) -> int:
        return self.G.shape[0]

    def __matmul__(self, v):
        return self.G @ v


def _average_windows_1d(space: FeSpace, lo: np.ndarray, hi: np.ndarray, S: int):
    """Per-box 1D averages of the global 1D Lagrange basis.

    Returns the first global 1D node of each window and a ``(m, W)`` array of
    ``|hi - lo|^{-1} int_lo^hi psi_j``, where the window spans ``S`` cells.
    Each clipped cell interval is integrated with a ``(k+1)``-point Gauss rule,
    which is exact for the degree-``k`` integrand.
    """
    k, n, h = space.k, space.grid.n, space.grid.h
    length = hi - lo
    c0 = np.clip(np.floor(lo / h).astype(np.int64), 0, n - S)
    t, w = gauss_rule_1d(k + 1)
    window = np.zeros((lo.size, S * k + 1))
    for s in range(S):
        a = (c0 + s) * h
        clo = np.maximum(lo, a)
        L = np.clip(np.minimum(hi, a + h) - clo, 0.0, None)
        x = clo[:, None] + L[:, None] * t[None, :]
        vals, _ = lagrange_1d(k, ((x - a[:, None]) / h).ravel())
        vals = vals.reshape(lo.size, t.size, k + 1)
        window[:, s * k: s * k + k + 1] += np.einsum("g,mgb->mb", w, vals) * L[:, None]
    return k * c0, window / length[:, None]


def build_averaging_operator(space: FeSpace, cloud: DataCloud) -> AveragingOperator:
    """Exact box averages of the FE basis.

    The basis and the boxes are both tensor products, so each average factors
    into one-dimensional averages that are multiplied together.
    """
    if not cloud.l_hat > 0:
        raise ValueError("averaging boxes must have positive volume")
    if cloud.d != space.d:
        raise ValueError("cloud and space dimensions differ")
    d, m = space.d, cloud.m
    # an interval of length l meets at most ceil(l/h) + 1 cells
    S = min(space.grid.n, int(math.ceil(cloud.l_hat / space.grid.h * (1 + 1e-12))) + 1)
    starts, windows = zip(*(_average_windows_1d(space, cloud.lower[:, j], cloud.upper[:, j], S)
                            for j in range(d)))
    W = windows[0].shape[1]
    vals = np.ones((m,) + (1,) * d)
    idx = np.zeros((m,) + (1,) * d, dtype=np.int64)
    for j in range(d):
        shape = [m] + [1] * d
        shape[j + 1] = W
        vals = vals * windows[j].reshape(shape)
        idx = idx * space.nodes_1d + (starts[j][:, None] + np.arange(W)).reshape(shape)
    rows = np.repeat(np.arange(m), W**d)
    G = sp.csr_matrix((vals.ravel(), (rows, idx.ravel())), shape=(m, space.N))
    G.eliminate_zeros()
    return AveragingOperator(G, cloud.weights)


@dataclass(frozen=True, eq=False)
class DataValues:
    values: np.ndarray
    mode: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown data mode {self.mode!r}")


def box_averages(cloud: DataCloud, u, q: int = 10) -> np.ndarray:
    """Averages of ``u`` over every box, tensor Gauss with ``q`` points per dimension."""
    u = as_field(u)
    pts, w = box_rule(np.zeros(cloud.d), np.full(cloud.d, cloud.l_hat), q)
    allpts = cloud.lower[:, None, :] + pts[None, :, :]
    vals = u(allpts.reshape(-1, cloud.d)).reshape(cloud.m, -1)
    return vals @ w / cloud.box_volume


def data_values(cloud: DataCloud, u, mode: str = "exact_average") -> DataValues:
    if mode == "exact_average":
        return DataValues(box_averages(cloud, u), mode)
    if mode == "point_value":
        return DataValues(as_field(u)(cloud.points), mode)
    raise ValueError(f"unknown data mode {mode!r}")


def assemble_data_matrix(op: AveragingOperator) -> sp.csr_matrix:
    """``G^T diag(w) G``, the matrix of ``b(., .)``."""
    return (op.G.T @ sp.diags(op.weights) @ op.G).tocsr()


def data_rhs(op: AveragingOperator, values) -> np.ndarray:
    """``G^T diag(w) b``, the vector of ``v -> sum_i b_i |B_i| avg_{B_i} v``."""
    b = values.values if isinstance(values, DataValues) else np.asarray(values)
    return op.G.T @ (op.weights * b)


def _overlapping_pairs(cloud: DataCloud) -> np.ndarray:
    tree = cKDTree(cloud.points)
    return tree.query_pairs(cloud.l_hat, p=np.inf, output_type="ndarray")


def data_error_dual_norm(cloud: DataCloud, values, u) -> float:
    """L2 dual norm of ``v -> sum_i (b_i - avg_{B_i} u) |B_i| avg_{B_i} v``.

    The functional is represented by ``g = sum_i c_i chi_{B_i}``, so the
    norm is ``||g||_{L2}``; its square is ``sum_ij c_i c_j |B_i cap B_j|``,
    evaluated exactly over overlapping pairs.
    """
    b = values.values if isinstance(values, DataValues) else np.asarray(values)
    c = b - box_averages(cloud, u)
    total = cloud.box_volume * float(c @ c)
    pairs = _overlapping_pairs(cloud)
    if len(pairs):
        i, j = pairs.T
        gap = np.abs(cloud.points[i] - cloud.points[j])
        vol = np.prod(np.clip(cloud.l_hat - gap, 0.0, None), axis=1)
        total += 2.0 * float(np.sum(c[i] * c[j] * vol))
    return math.sqrt(max(total, 0.0))


def overlap_count(cloud: DataCloud) -> int:
    """Maximal number of (open) boxes sharing a point.

    For axis-aligned boxes the deepest region is the intersection of a clique,
    whose lower corner has every coordinate equal to some box's lower
    coordinate.  Candidates are built box-by-box from neighbouring lower
    coordinates and counted with half-open membership ``lo <= x < hi``.
    """
    lo, hi = cloud.lower, cloud.upper
    tree = cKDTree(cloud.points)
    best = 1
    for i, nbrs in enumerate(tree.query_ball_point(cloud.points, cloud.l_hat, p=np.inf)):
        nbrs = np.asarray(nbrs)
        if nbrs.size <= best:
            continue
        axes = []
        for j in range(cloud.d):
            c = np.unique(lo[nbrs, j])
            axes.append(c[(c >= lo[i, j]) & (c < hi[i, j])])
        cand = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
        inside = np.all((lo[nbrs][None] <= cand[:, None]) & (cand[:, None] < hi[nbrs][None]), axis=2)
        best = max(best, int(inside.sum(axis=1).max()))
    return best

