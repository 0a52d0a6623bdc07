"""Sweeps over the data count and the PDE perturbation for the smooth test problem.

Test problem: ``u = sum_i cos(pi x_i)`` on ``[0, 1]^d`` solves
``-Lap u + pi^2 u = 2 pi^2 u`` with natural boundary conditions.  The
regulariser uses the exact operator and the source ``(1 - eps) f``.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import dataterm, fespace, regsolver
from .fespace import FeSpace, cosine_sum
from .grid import Grid
from .params import select_parameters

CSV_HEADER = "d,k,n,m,Q,eps,data_mode,seed,l_hat,delta,l2_error,cg_iterations,runtime_seconds"

DEFAULT_DISCRETISATION = {1: (64, 4), 2: (64, 4), 3: (16, 2)}
DEFAULT_M = {
    1: [16, 32, 64, 128, 256, 512],
    2: [64, 128, 256, 512, 1024, 2048, 4096],
    3: [64, 128, 256, 512, 1024, 2048],
}
DEFAULT_EPS = [2.0**-j for j in range(1, 9)]
DATA_MODES = {"average": "exact_average", "point": "point_value"}
SIGMA = math.pi**2


@dataclass
class ExperimentConfig:
    d: int = 2
    k: int | None = None
    n: int | None = None
    D: float = 1.0
    sweep: str = "m"
    m_values: list[int] | None = None
    eps_values: list[float] | None = None
    Q_values: list[float] = field(default_factory=lambda: [4.0, 2.0])
    data_mode: str = "average"
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    out: str | None = None
    tol: float = 1e-10
    maxit: int | None = None
    workers: int = 1

    def __post_init__(self):
        n, k = DEFAULT_DISCRETISATION[self.d]
        self.n = self.n or n
        self.k = self.k or k
        if self.sweep not in ("m", "eps"):
            raise ValueError(f"sweep must be 'm' or 'eps', got {self.sweep!r}")
        if self.data_mode not in DATA_MODES:
            raise ValueError(f"data mode must be one of {sorted(DATA_MODES)}")
        if self.m_values is None:
            self.m_values = DEFAULT_M[self.d] if self.sweep == "m" else [512]
        if self.eps_values is None:
            self.eps_values = DEFAULT_EPS if self.sweep == "eps" else [0.5]
        for name in ("m_values", "eps_values", "Q_values", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if min(self.m_values) < 1:
            raise ValueError("all m must be >= 1")
        if not all(0 <= e < 1 for e in self.eps_values):
            raise ValueError("eps must lie in [0, 1)")

    def cases(self) -> list[dict]:
        """Case parameters in output order: Q, then sweep value, then seed."""
        out = []
        for Q in self.Q_values:
            for m in self.m_values:
                for eps in self.eps_values:
                    for seed in self.seeds:
                        out.append(dict(d=self.d, k=self.k, n=self.n, D=self.D, m=m, Q=Q, eps=eps,
                                        data_mode=self.data_mode, seed=seed, tol=self.tol,
                                        maxit=self.maxit))
        return out


@dataclass
class ResultRow:
    d: int
    k: int
    n: int
    m: int
    Q: float
    eps: float
    data_mode: str
    seed: int
    l_hat: float
    delta: float
    l2_error: float
    cg_iterations: int
    runtime_seconds: float
    note: str = ""

    def csv_fields(self) -> list[str]:
        out = []
        for f in fields(self):
            if f.name == "note":
                continue
            v = getattr(self, f.name)
            out.append(format(v, ".17g") if isinstance(v, float) else str(v))
        return out


@lru_cache(maxsize=4)
def _pde_part(d: int, n: int, k: int, D: float):
    space = FeSpace(Grid(d, n, D), k)
    return space, fespace.assemble_stiffness(space, 1.0), fespace.assemble_mass(space, SIGMA)


@lru_cache(maxsize=4)
def _load(d: int, n: int, k: int, D: float, eps: float):
    space, _, _ = _pde_part(d, n, k, D)
    return fespace.assemble_load(space, cosine_sum(d, (1.0 - eps) * 2.0 * math.pi**2))


def run_case(d, k, n, m, Q, eps, data_mode="average", seed=0, D=1.0, tol=1e-10, maxit=None) -> ResultRow:
    """Parameters, data, assembly, CG solve and the L2 error of one configuration."""
    start = time.perf_counter()
    space, K, Mmat = _pde_part(d, n, k, D)
    u = cosine_sum(d)
    par = select_parameters(m, d, D, Q, 1.0)
    cloud = dataterm.sample_points(m, d, par.l_hat, D, seed)
    op = dataterm.build_averaging_operator(space, cloud)
    values = dataterm.data_values(cloud, u, DATA_MODES[data_mode])
    system = regsolver.System(space, K, Mmat, op, _load(d, n, k, D, eps),
                              dataterm.data_rhs(op, values), par.delta)
    note = ""
    try:
        rep = regsolver.solve(system, tol=tol, maxit=maxit)
        err, iters = fespace.l2_error(space, rep.solution, u), rep.iterations
    except regsolver.ConvergenceError as exc:
        err, iters, note = math.nan, exc.iterations, str(exc)
    return ResultRow(d, k, n, m, float(Q), float(eps), data_mode, seed, par.l_hat, par.delta,
                     err, iters, time.perf_counter() - start, note)


def _run_case_kwargs(kw):
    return run_case(**kw)


def run_cases(config: ExperimentConfig) -> list[ResultRow]:
    cases = config.cases()
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return list(pool.map(_run_case_kwargs, cases))
    return [run_case(**kw) for kw in cases]


def fit_loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``; ``nan`` for fewer than two points."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = np.isfinite(y) & (y > 0) & (x > 0)
    if np.unique(x[ok]).size < 2:
        return math.nan
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


@dataclass
class Curve:
    d: int
    Q: float
    data_mode: str
    x: list[float]
    error: list[float]
    slope: float


def summarize(rows: list[ResultRow], sweep: str) -> list[Curve]:
    """Geometric mean over seeds per sweep value, one curve per ``(d, Q, mode)``."""
    key = "m" if sweep == "m" else "eps"
    curves = {}
    for r in rows:
        curves.setdefault((r.d, r.Q, r.data_mode), {}).setdefault(getattr(r, key), []).append(r.l2_error)
    out = []
    for (d, Q, mode), pts in curves.items():
        xs = list(pts)
        errs = [float(np.exp(np.mean(np.log(pts[x])))) for x in xs]
        out.append(Curve(d, Q, mode, xs, errs, fit_loglog_slope(xs, errs)))
    return out


def format_summary(curves: list[Curve], sweep: str) -> str:
    lines = []
    var = "m" if sweep == "m" else "eps"
    for c in curves:
        slope = "n/a" if math.isnan(c.slope) else f"{c.slope:.3f}"
        pts = " ".join(f"{x:g}:{e:.4g}" for x, e in zip(c.x, c.error))
        lines.append(f"d={c.d} Q={c.Q:g} mode={c.data_mode} slope(log err / log {var})={slope}  {pts}")
    return "\n".join(lines)


def write_csv(rows: list[ResultRow], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for r in rows:
            writer.writerow(r.csv_fields())


def write_metadata(config: ExperimentConfig, path) -> Path:
    """Sidecar ``<csv>.meta.json`` recording generator, seeds and aggregation."""
    meta = {
        "generator": dataterm.GENERATOR,
        "seeding": "numpy.random.default_rng(seed), one cloud per (case, seed)",
        "aggregation": "geometric mean of l2_error over seeds",
        "config": asdict(config),
    }
    meta_path = Path(str(path) + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, default=str) + "\n")
    return meta_path


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_sweep(config: ExperimentConfig):
    """Run every case, write the CSV (if ``config.out``) and return ``(rows, curves)``."""
    rows = run_cases(config)
    if config.out:
        write_csv(rows, config.out)
        write_metadata(config, config.out)
    return rows, summarize(rows, config.sweep)
