"""Executable checks of the Poincare-type lemmas and error bounds.

Every check returns a :class:`CheckResult`; :func:`run_suite` runs the whole
battery at desk scale and :func:`format_report` renders one greppable
``CHECK <name> PASS|FAIL`` line per check.  Geometry for the constant-
dependent checks is a deterministic tiling, so overlap count, box/cover
mismatch and covering diameter are known exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from . import dataterm, fespace, regsolver
from .fespace import FeSpace, ScalarField, as_field, cosine_sum
from .grid import Grid, box_rule

SLACK = 1e-10


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"CHECK {self.name} {status}" + (f"  {self.detail}" if self.detail else "")


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the coercivity estimate for a known covering."""

    R: float
    M: int
    delta: float
    alpha_min: float = 1.0
    eta: float = 1.0
    theta: float = 1.0

    @property
    def poincare_weight(self) -> float:
        return self.R**2 * self.M / (math.pi**2 * self.alpha_min)

    @property
    def Gamma(self) -> float:
        return self.eta * max(self.poincare_weight, self.delta)


def optimal_delta(R: float, M: int = 1, alpha_min: float = 1.0) -> float:
    return R * R * M / (math.pi**2 * alpha_min)


def tiling_constants(cloud: dataterm.DataCloud, delta: float | None = None,
                     alpha_min: float = 1.0) -> BoundConstants:
    """Constants for a cloud whose boxes tile the domain (so ``K_i = B_i``)."""
    R = cloud.box_diameter
    M = dataterm.overlap_count(cloud)
    if delta is None:
        delta = optimal_delta(R, M, alpha_min)
    return BoundConstants(R=R, M=M, delta=delta, alpha_min=alpha_min)


# -- Poincare inequalities on boxes --------------------------------------------

def _box_norms(lo, hi, v: ScalarField, q: int = 10):
    pts, w = box_rule(lo, hi, q)
    vals = v(pts)
    grads = v.gradient(pts)
    return vals, grads, w


def check_poincare(lo, hi, v: ScalarField, q: int = 10):
    """``||v - avg_U v|| <= diam(U)/pi ||grad v||`` on the box ``U = [lo, hi]``."""
    lo, hi = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
    vals, grads, w = _box_norms(lo, hi, v, q)
    mean = float(w @ vals) / float(w.sum())
    lhs = math.sqrt(float(w @ (vals - mean) ** 2))
    rhs = np.linalg.norm(hi - lo) / math.pi * math.sqrt(float(w @ np.sum(grads**2, axis=1)))
    return lhs, rhs, lhs <= rhs + SLACK


def check_subset_poincare(lo, hi, wlo, whi, v: ScalarField, q: int = 10):
    """``||v||^2_U <= 3 |U|/|W| (C_U^2 ||grad v||^2_U + |W| (avg_W v)^2)``."""
    lo, hi = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
    wlo, whi = np.atleast_1d(wlo).astype(float), np.atleast_1d(whi).astype(float)
    vals, grads, w = _box_norms(lo, hi, v, q)
    wpts, ww = box_rule(wlo, whi, q)
    volU, volW = float(np.prod(hi - lo)), float(np.prod(whi - wlo))
    avgW = float(ww @ v(wpts)) / volW
    CU = np.linalg.norm(hi - lo) / math.pi
    lhs = float(w @ vals**2)
    rhs = 3.0 * volU / volW * (CU**2 * float(w @ np.sum(grads**2, axis=1)) + volW * avgW**2)
    return lhs, rhs, lhs <= rhs + SLACK


def polynomial_field(coef) -> ScalarField:
    p = Polynomial(coef)
    dp = p.deriv()
    return ScalarField(lambda x: p(x[:, 0]), lambda x: dp(x[:, 0])[:, None], name=f"poly{len(coef) - 1}")


# -- data-dependent coercivity and continuity ----------------------------------

def random_dof_vectors(space: FeSpace, count: int, rng) -> list[np.ndarray]:
    """Mix of rough (iid normal), smooth (low cosine modes) and constant vectors."""
    out = []
    x = space.dof_points
    for i in range(count):
        kind = i % 3
        if kind == 0:
            v = rng.standard_normal(space.N)
        elif kind == 1:
            freq = rng.integers(0, 4, size=(4, space.d))
            amp = rng.standard_normal(4)
            v = sum(a * np.prod(np.cos(np.pi * fr * x), axis=1) for a, fr in zip(amp, freq))
        else:
            v = np.full(space.N, rng.standard_normal()) + 1e-3 * rng.standard_normal(space.N)
        out.append(np.asarray(v, dtype=float))
    return out


def _forms(space: FeSpace, op: dataterm.AveragingOperator, v):
    quad = space.default_quad()
    l2 = fespace.l2_norm(space, v, quad) ** 2
    grad = fespace.h1_seminorm_error(space, v, None, quad) ** 2
    a = op.G @ v
    b = float(np.sum(op.weights * a * a))
    return l2, grad, b


def check_data_coercivity(space: FeSpace, cloud: dataterm.DataCloud, delta: float | None = None,
                          alpha_min: float = 1.0, samples: int = 100, seed: int = 0):
    """Worst slack of the data Poincare estimate and of L2 coercivity of ``c``.

    ``cloud`` must tile the domain.  The ``c``-form uses ``alpha = 1``,
    ``sigma = 0``.  Returns ``(worst_slack, constants)``; slacks are
    ``rhs - lhs`` and should be ``>= -1e-10``.
    """
    const = tiling_constants(cloud, delta, alpha_min)
    op = dataterm.build_averaging_operator(space, cloud)
    rng = np.random.default_rng(seed)
    worst = math.inf
    for v in random_dof_vectors(space, samples, rng):
        l2, grad, b = _forms(space, op, v)
        first = const.eta * (const.poincare_weight * alpha_min * grad + b) - l2
        second = const.Gamma * (grad + b / const.delta) - l2
        worst = min(worst, first, second)
    return worst, const


def check_data_continuity(space: FeSpace, cloud: dataterm.DataCloud, samples: int = 100, seed: int = 0):
    """Worst slack of ``b(v, v) <= M ||v||^2`` over random coefficient vectors."""
    M = dataterm.overlap_count(cloud)
    op = dataterm.build_averaging_operator(space, cloud)
    rng = np.random.default_rng(seed)
    worst = math.inf
    for v in random_dof_vectors(space, samples, rng):
        l2, _, b = _forms(space, op, v)
        worst = min(worst, M * l2 - b)
    return worst, M


def check_holder_bound(cloud: dataterm.DataCloud, u: ScalarField):
    """Point-value data error against ``Lip(u) M |Omega|^{1/2} r``."""
    values = dataterm.data_values(cloud, u, "point_value")
    E = dataterm.data_error_dual_norm(cloud, values, u)
    M = dataterm.overlap_count(cloud)
    bound = u.lipschitz * M * math.sqrt(cloud.D**cloud.d) * cloud.box_diameter
    return E, bound, E <= bound + SLACK


# -- PDE error term and the rough-coefficient counterexample -------------------

def check_pde_error_term(f, eps: float, d: int, D: float = 1.0, q: int = 20):
    """``||f - (1 - eps) f||_{L2}`` by quadrature against ``eps ||f||_{L2}``."""
    f = as_field(f)
    pts, w = box_rule(np.zeros(d), np.full(d, D), q)
    fv = f(pts)
    E = math.sqrt(float(w @ (fv - (1.0 - eps) * fv) ** 2))
    expected = eps * math.sqrt(float(w @ fv**2))
    return E, expected, abs(E - expected) <= SLACK


def demo_rough_coefficient(eps_seq, q: int = 10):
    """Table of ``(eps, int beta u' v_eps', ||v_eps||, ratio)`` on ``(-1, 1)``.

    ``beta = -sgn(x)``, ``u(x) = x`` near the origin and ``v_eps`` the hat of
    half-width ``eps``.  Integrals are split at the kink so each piece is
    polynomial and the Gauss rule is exact.
    """
    rows = []
    for eps in eps_seq:
        if not 0 < eps < 0.5:
            raise ValueError("eps must lie in (0, 0.5)")
        integral = 0.0
        norm_sq = 0.0
        for a, b in ((-eps, 0.0), (0.0, eps)):
            x, w = box_rule([a], [b], q)
            x = x[:, 0]
            beta = -np.sign(x)
            du = np.ones_like(x)
            dv = -np.sign(x) / eps
            v = 1.0 - np.abs(x) / eps
            integral += float(w @ (beta * du * dv))
            norm_sq += float(w @ v**2)
        norm = math.sqrt(norm_sq)
        rows.append((eps, integral, norm, integral / norm))
    return rows


# -- discrete statements -------------------------------------------------------

def model_problem_system(space: FeSpace, cloud: dataterm.DataCloud, eps: float, delta: float,
                        mode: str = "exact_average", u: ScalarField | None = None):
    """Regularised system for ``-Lap u + pi^2 u = f`` with ``f`` scaled by ``1 - eps``."""
    d = space.d
    u = u or cosine_sum(d)
    f_aux = cosine_sum(d, (1.0 - eps) * 2.0 * math.pi**2)
    op = dataterm.build_averaging_operator(space, cloud)
    values = dataterm.data_values(cloud, u, mode)
    return regsolver.assemble_system(space, 1.0, math.pi**2, f_aux, op, values, delta)


def check_energy_identity(system: regsolver.System, samples: int = 20, seed: int = 0, tol: float = 1e-12):
    """Largest relative defect of ``||v - u_h||_c^2 = 2 (J(v) - J(u_h))``."""
    rep = regsolver.solve(system, tol=tol)
    uh = rep.solution
    Juh = regsolver.energy(system, uh)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for v in random_dof_vectors(system.space, samples, rng):
        lhs = regsolver.cnorm_sq(system, v - uh)
        rhs = 2.0 * (regsolver.energy(system, v) - Juh)
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst


def check_nested_cea(coarse: FeSpace, fine: FeSpace, system: regsolver.System, tol: float = 1e-12):
    """Generalised Cea inside ``V_H`` subset ``V_h``.

    ``u_H`` minimises the fine functional over the embedded coarse space;
    the claim is ``||u_H - u_h||_c <= ||Pi_H u_h - u_h||_c``.
    """
    P = fespace.prolongation(coarse, fine)
    uh = regsolver.solve(system, tol=tol).solution
    C = system.matrix()
    CH = (P.T @ C @ P).tocsr()
    xH, _, _ = regsolver.pcg(lambda v: CH @ v, P.T @ system.rhs, CH.diagonal(), tol)
    uH = P @ xH
    lhs = math.sqrt(regsolver.cnorm_sq(system, uH - uh))
    interp = P @ fespace.evaluate(fine, uh, coarse.dof_points)
    rhs = math.sqrt(regsolver.cnorm_sq(system, interp - uh))
    return lhs, rhs, lhs <= rhs + 1e-8


def check_error_estimate(space: FeSpace, nu: int, eps_values=(0.5, 0.25, 0.125), tol: float = 1e-12):
    """``||u_h - u|| <= Gamma E_pde + floor`` with tiled exact-average data.

    ``floor`` is the error of the ``eps = 0`` solve.  Returns a list of
    ``(eps, error, bound)`` rows.
    """
    d = space.d
    u = cosine_sum(d)
    cloud = dataterm.tiled_cloud(d, nu, space.grid.D)
    const = tiling_constants(cloud)
    f = cosine_sum(d, 2.0 * math.pi**2)

    def err(eps):
        system = model_problem_system(space, cloud, eps, const.delta)
        return fespace.l2_error(space, regsolver.solve(system, tol=tol).solution, u)

    floor = err(0.0)
    rows = []
    for eps in eps_values:
        E_pde, _, _ = check_pde_error_term(f, eps, d, space.grid.D)
        rows.append((eps, err(eps), const.Gamma * E_pde + floor))
    return rows


def interpolation_slopes(k: int, ns=(4, 8, 16, 32), d: int = 1):
    """Fitted log-log slopes of L2 and H1-seminorm interpolation errors
    against the cell count ``n`` (so ``-(k+1)`` and ``-k`` are expected)."""
    u = cosine_sum(d)
    l2, h1 = [], []
    for n in ns:
        space = FeSpace(Grid(d, n), k)
        v = fespace.interpolate(space, u)
        l2.append(fespace.l2_error(space, v, u))
        h1.append(fespace.h1_seminorm_error(space, v, u))
    ln = np.log(ns)
    return np.polyfit(ln, np.log(l2), 1)[0], np.polyfit(ln, np.log(h1), 1)[0]


# -- the battery ---------------------------------------------------------------

def run_suite(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = []

    def add(name, passed, detail="", **values):
        results.append(CheckResult(name, bool(passed), detail, values))

    lhs, rhs, _ = check_poincare([0.0], [1.0], cosine_sum(1))
    add("poincare_equality", abs(lhs - rhs) <= 1e-9, f"lhs={lhs:.12g} rhs={rhs:.12g}", lhs=lhs, rhs=rhs)

    ok = all(check_poincare([0.0], [1.0], polynomial_field(rng.standard_normal(6)))[2] for _ in range(50))
    add("poincare_random_polynomials", ok, "50 degree-5 polynomials on (0,1)")

    worst = math.inf
    for _ in range(50):
        v = polynomial_field(rng.standard_normal(6))
        for W in (([0.0], [0.5]), ([0.3], [0.4])):
            lhs, rhs, _ = check_subset_poincare([0.0], [1.0], *W, v)
            worst = min(worst, rhs - lhs)
    add("subset_poincare", worst >= -SLACK, f"worst slack={worst:.3g}", slack=worst)

    space1 = FeSpace(Grid(1, 16), 2)
    slack, const = check_data_coercivity(space1, dataterm.tiled_cloud(1, 4), samples=100, seed=seed)
    add("data_coercivity_1d", slack >= -SLACK, f"worst slack={slack:.3g} Gamma={const.Gamma:.6g}", slack=slack)
    space2 = FeSpace(Grid(2, 8), 2)
    slack, const = check_data_coercivity(space2, dataterm.tiled_cloud(2, 4), samples=100, seed=seed)
    add("data_coercivity_2d", slack >= -SLACK, f"worst slack={slack:.3g} Gamma={const.Gamma:.6g}", slack=slack)

    worst = math.inf
    for trial in range(4):
        cloud = dataterm.sample_points(12, 2, 0.3, seed=seed + trial)
        s, _ = check_data_continuity(space2, cloud, samples=25, seed=seed + trial)
        worst = min(worst, s)
    add("data_continuity", worst >= -SLACK, f"worst slack={worst:.3g}", slack=worst)

    ok, worst_ratio = True, 0.0
    for d, m, l in ((1, 20, 0.05), (2, 50, 0.1), (2, 200, 0.08), (3, 40, 0.2)):
        cloud = dataterm.sample_points(m, d, l, seed=seed + m)
        E, bound, passed = check_holder_bound(cloud, cosine_sum(d))
        ok &= passed
        worst_ratio = max(worst_ratio, E / bound)
    add("holder_data_bound", ok, f"max E_data/bound={worst_ratio:.3g}")

    space_e = FeSpace(Grid(2, 8), 2)
    cloud = dataterm.sample_points(30, 2, 0.1, seed=seed)
    system = model_problem_system(space_e, cloud, 0.5, 0.01)
    defect = check_energy_identity(system, seed=seed)
    add("energy_identity", defect <= 1e-9, f"max relative defect={defect:.3g}", defect=defect)

    coarse, fine = FeSpace(Grid(2, 4), 2), FeSpace(Grid(2, 8), 2)
    system = model_problem_system(fine, cloud, 0.5, 0.01)
    lhs, rhs, ok = check_nested_cea(coarse, fine, system)
    add("nested_cea", ok, f"lhs={lhs:.6g} rhs={rhs:.6g}")

    rows = check_error_estimate(FeSpace(Grid(1, 32), 2), nu=8)
    ok = all(e <= b for _, e, b in rows)
    add("error_estimate", ok, " ".join(f"eps={e:g}:{err:.3g}<={b:.3g}" for e, err, b in rows))

    ok = True
    for d, eps, expected in ((1, 0.0, 0.0), (1, 0.5, math.pi**2 / math.sqrt(2)),
                             (2, 0.25, 0.25 * 2 * math.pi**2)):
        E, _, passed = check_pde_error_term(cosine_sum(d, 2 * math.pi**2), eps, d)
        ok &= passed and abs(E - expected) <= SLACK
    add("pde_error_identity", ok)

    table = demo_rough_coefficient([0.375 / 2**j for j in range(8)])
    dev = max(abs(r - math.sqrt(6 / e)) for e, _, _, r in table)
    dev_int = max(abs(i - 2.0) for _, i, _, _ in table)
    add("rough_coefficient_ratio", dev <= 1e-10 and dev_int <= 1e-10,
        f"max |ratio - sqrt(6/eps)|={dev:.3g}")

    for k in (1, 2):
        s0, s1 = interpolation_slopes(k)
        add(f"interpolation_order_k{k}", abs(s0 + k + 1) <= 0.3 and abs(s1 + k) <= 0.3,
            f"L2 slope={s0:.3f} H1 slope={s1:.3f}")
    return results


def format_report(results) -> str:
    return "\n".join(r.line() for r in results)
