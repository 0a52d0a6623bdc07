"""Uniform tensor-product meshes of the cube [0, D]^d and Gauss rules."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform mesh of ``[0, D]^d`` with ``n`` cells per dimension.

    Cells are enumerated lexicographically in their lattice multi-index
    (last axis fastest, numpy C order).
    """

    d: int
    n: int
    D: float = 1.0

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"cell count must be a positive integer, got {self.n}")
        if not self.D > 0:
            raise ValueError(f"edge length must be positive, got {self.D}")

    @property
    def h(self) -> float:
        return self.D / self.n

    @property
    def num_cells(self) -> int:
        return self.n**self.d

    @property
    def volume(self) -> float:
        return self.D**self.d

    def cell_multi_index(self, cell=None) -> np.ndarray:
        """Lattice multi-indices, shape ``(ncells, d)`` (or ``(d,)`` for one cell)."""
        if cell is None:
            cell = np.arange(self.num_cells)
        idx = np.unravel_index(cell, (self.n,) * self.d)
        return np.stack(idx, axis=-1)

    def cell_origin(self, cell=None) -> np.ndarray:
        return self.cell_multi_index(cell) * self.h

    def cell_box(self, cell: int) -> tuple[np.ndarray, np.ndarray]:
        lo = self.cell_origin(cell).astype(float)
        return lo, lo + self.h

    def locate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Cell index and reference coordinates in ``[0, 1]^d`` of each point.

        Points on interior faces are assigned to the upper cell; points on
        the upper domain boundary to the last cell.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        scaled = points / self.h
        mi = np.clip(np.floor(scaled).astype(np.int64), 0, self.n - 1)
        local = scaled - mi
        cell = np.ravel_multi_index(tuple(mi.T), (self.n,) * self.d)
        return cell, local


def build_grid(d: int, n: int, D: float = 1.0) -> Grid:
    return Grid(d, n, D)


@dataclass(frozen=True, eq=False)
class QuadRule:
    """Tensor Gauss rule on the reference cell ``[0, 1]^d``; weights sum to 1."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=None)
def gauss_legendre_1d(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[-1, 1]``."""
    if q < 1:
        raise ValueError("need at least one quadrature point")
    return np.polynomial.legendre.leggauss(q)


def gauss_rule_1d(q: int) -> tuple[np.ndarray, np.ndarray]:
    """``q``-point Gauss rule on ``[0, 1]`` with weights summing to 1."""
    x, w = gauss_legendre_1d(q)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def gauss_rule(q: int, d: int) -> QuadRule:
    x, w = gauss_rule_1d(q)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    points.flags.writeable = False
    weights.flags.writeable = False
    return QuadRule(points, weights)


def box_rule(lo, hi, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Physical points and weights (summing to the box volume) on ``[lo, hi]``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    rule = gauss_rule(q, lo.size)
    pts = lo + rule.points * (hi - lo)
    return pts, rule.weights * np.prod(hi - lo)


def clip_box_to_cell(grid: Grid, cell: int, box):
    """Intersection of an axis-aligned box ``(lo, hi)`` with a grid cell.

    Returns ``None`` when the intersection has zero measure.
    """
    lo, hi = (np.asarray(b, dtype=float).reshape(grid.d) for b in box)
    clo, chi = grid.cell_box(cell)
    out_lo = np.maximum(lo, clo)
    out_hi = np.minimum(hi, chi)
    if np.any(out_hi <= out_lo):
        return None
    return out_lo, out_hi
