"""
Error against the number of data points
=======================================

With exact averages and a source off by 50 %, the error decays like
m^(-2/d) once m is large enough for the boxes to resolve u; in 2D the
small-m end below is still pre-asymptotic.  Doubling the box/lattice volume ratio Q costs a constant factor.
"""

from pdelearn.experiment import ExperimentConfig, format_summary, run_sweep

for d in (1, 2):
    config = ExperimentConfig(d=d, k=2, n=32 if d == 1 else 24, sweep="m",
                              m_values=[16, 32, 64, 128, 256], Q_values=[2.0, 4.0],
                              seeds=[0, 1, 2])
    rows, curves = run_sweep(config)
    print(format_summary(curves, "m"))
    # the expected slope is -2/d
    print(f"reference slope: {-2 / d:.3f}\n")
