"""
Point values as inexact data
============================

Using u(p_i) instead of the box average adds a data error that no amount of
PDE accuracy removes.  As the PDE perturbation eps shrinks, the error of
exact-average data keeps falling while point data hits a floor; smaller
boxes (larger Q) lower that floor.
"""

from pdelearn.experiment import ExperimentConfig, run_sweep

eps = [2.0**-j for j in range(2, 17, 2)]
for mode in ("average", "point"):
    config = ExperimentConfig(d=1, sweep="eps", m_values=[64], eps_values=eps,
                              Q_values=[2.0, 4.0], data_mode=mode, seeds=[0, 1, 2])
    _, curves = run_sweep(config)
    for c in curves:
        print(f"{mode:8s} Q={c.Q:g}: " + "  ".join(f"{e:.2e}" for e in c.error))
