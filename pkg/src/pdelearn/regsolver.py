"""Assembly and solution of the data-augmented elliptic system.

The discrete problem minimises

    J(v) = 1/2 v^T C v - r^T v,
    C = K(alpha) + M(sigma) + B / delta,   r = F(f) + G^T W b / delta,

with ``B = G^T W G`` the data matrix.  ``B`` is never formed for solving:
its action is ``G^T (W (G v))``, which keeps the cost proportional to the
number of nonzeros in ``G`` instead of its dense per-box blocks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dataterm import AveragingOperator, DataValues, assemble_data_matrix, data_rhs
from .fespace import FeSpace, assemble_load, assemble_mass, assemble_stiffness


class ConvergenceError(RuntimeError):
    """CG stopped at ``maxit`` above the requested tolerance."""

    def __init__(self, message, residual, iterations, solution):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.solution = solution


@dataclass(eq=False)
class System:
    space: FeSpace
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    averaging: AveragingOperator
    load: np.ndarray
    data_load: np.ndarray
    delta: float
    data_scale: float = 1.0

    def __post_init__(self):
        self.pde = (self.stiffness + self.mass).tocsr()
        self._gw = self.averaging.weights * (self.data_scale / self.delta)

    @property
    def N(self) -> int:
        return self.pde.shape[0]

    @property
    def data_weight(self) -> float:
        """Effective factor in front of ``b(., .)``."""
        return self.data_scale / self.delta

    @property
    def rhs(self) -> np.ndarray:
        return self.load + self.data_weight * self.data_load

    def matvec(self, v):
        G = self.averaging.G
        return self.pde @ v + G.T @ (self._gw * (G @ v))

    def diagonal(self) -> np.ndarray:
        G = self.averaging.G
        return self.pde.diagonal() + G.multiply(G).T @ self._gw

    def matrix(self) -> sp.csr_matrix:
        """Explicit ``C``; only sensible for small problems."""
        return (self.pde + self.data_weight * assemble_data_matrix(self.averaging)).tocsr()

    def anorm_sq(self, v) -> float:
        return float(v @ (self.pde @ v))

    def bnorm_sq(self, v) -> float:
        a = self.averaging.G @ v
        return float(np.sum(self.averaging.weights * a * a))


def assemble_system(space: FeSpace, alpha, sigma, f, averaging: AveragingOperator,
                    values, delta: float, data_scale: float = 1.0, quad=None) -> System:
    """Assemble ``C`` and ``r``.

    ``data_scale=0`` drops the data term (the limit ``delta -> inf``);
    the pure-data-fitting setting is ``alpha=1, sigma=0, f=0``.
    """
    if not delta > 0:
        raise ValueError("regularisation weight delta must be positive")
    if averaging.m < 1:
        raise ValueError("at least one data box is required")
    b = values.values if isinstance(values, DataValues) else np.asarray(values, dtype=float)
    if b.shape != (averaging.m,):
        raise ValueError("number of data values does not match the averaging operator")
    return System(
        space=space,
        stiffness=assemble_stiffness(space, alpha, quad),
        mass=assemble_mass(space, sigma, quad),
        averaging=averaging,
        load=assemble_load(space, f, quad),
        data_load=data_rhs(averaging, b),
        delta=float(delta),
        data_scale=float(data_scale),
    )


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    residual: float
    energy: float
    seconds: float


def pcg(matvec, b, diag, tol=1e-10, maxit=None):
    """Jacobi-preconditioned CG from a zero start.

    Stops on ``||b - A x|| <= tol ||b||`` (recursive residual, checked
    against the true residual before returning).  Returns
    ``(x, iterations, relative residual)``; raises :class:`ConvergenceError`.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    maxit = 10 * n if maxit is None else maxit
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x, 0, 0.0
    inv_diag = 1.0 / diag
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    target = tol * bnorm
    it = 0
    while True:
        rnorm = np.linalg.norm(r)
        if rnorm <= target:
            rnorm = np.linalg.norm(b - matvec(x))
            if rnorm <= target:
                return x, it, rnorm / bnorm
            # drifted recursive residual: restart from the true one
            r = b - matvec(x)
            z = inv_diag * r
            p = z.copy()
            rz = r @ z
        if it >= maxit:
            raise ConvergenceError(
                f"CG did not reach {tol:g} in {maxit} iterations (residual {rnorm / bnorm:.3g})",
                rnorm / bnorm, it, x)
        Ap = matvec(p)
        step = rz / (p @ Ap)
        x += step * p
        r -= step * Ap
        z = inv_diag * r
        rz_new = r @ z
        p *= rz_new / rz
        p += z
        rz = rz_new
        it += 1


def solve(system: System, tol: float = 1e-10, maxit: int | None = None) -> SolveReport:
    start = time.perf_counter()
    x, it, res = pcg(system.matvec, system.rhs, system.diagonal(), tol, maxit)
    return SolveReport(x, it, res, energy(system, x), time.perf_counter() - start)


def energy(system: System, v) -> float:
    v = np.asarray(v, dtype=float)
    return 0.5 * float(v @ system.matvec(v)) - float(system.rhs @ v)


def cnorm_sq(system: System, v) -> float:
    v = np.asarray(v, dtype=float)
    return float(v @ system.matvec(v))
