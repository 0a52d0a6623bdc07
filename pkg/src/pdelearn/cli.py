"""Command-line entry point: ``python -m pdelearn``."""

from __future__ import annotations

import argparse
import sys

from . import oracle
from .experiment import ExperimentConfig, format_summary, run_sweep


def _list(conv):
    def parse(text):
        try:
            return [conv(t) for t in text.replace(",", " ").split()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pdelearn", description=__doc__)
    p.add_argument("--dim", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--order", type=int, default=None, help="polynomial order k")
    p.add_argument("--cells", type=int, default=None, help="elements per dimension")
    p.add_argument("--sweep", choices=("m", "eps"), default="m")
    p.add_argument("--m", type=_list(int), default=None, help="comma-separated data counts")
    p.add_argument("--eps", type=_list(float), default=None, help="comma-separated PDE perturbations")
    p.add_argument("--Q", type=_list(float), default=[4.0, 2.0], help="comma-separated volume ratios")
    p.add_argument("--data-mode", choices=("average", "point"), default="average")
    p.add_argument("--seeds", type=_list(int), default=[0, 1, 2, 3, 4])
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--maxit", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--verify", action="store_true", help="run the oracle checks instead of a sweep")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verify:
        results = oracle.run_suite()
        print(oracle.format_report(results))
        return 0 if all(r.passed for r in results) else 1
    config = ExperimentConfig(
        d=args.dim, k=args.order, n=args.cells, sweep=args.sweep,
        m_values=args.m, eps_values=args.eps, Q_values=args.Q,
        data_mode=args.data_mode, seeds=args.seeds, out=args.out,
        tol=args.tol, maxit=args.maxit, workers=args.workers,
    )
    rows, curves = run_sweep(config)
    for r in rows:
        if r.note:
            print(f"failed case m={r.m} Q={r.Q:g} eps={r.eps:g} seed={r.seed}: {r.note}", file=sys.stderr)
    print(format_summary(curves, config.sweep))
    return 0


if __name__ == "__main__":
    sys.exit(main())
