"""
Fitting scattered box averages with a PDE regulariser
=====================================================

Recover u(x, y) = cos(pi x) + cos(pi y) on the unit square from 256 box
averages, regularising with -Lap u + pi^2 u = f where only half of the true
source is known.
"""

import math

import numpy as np

import pdelearn as pl

# the unknown function and its (deliberately wrong) source term
d = 2
u = pl.cosine_sum(d)
f_guess = pl.cosine_sum(d, 0.5 * 2 * math.pi**2)

# box size and weight from the lattice heuristic
par = pl.select_parameters(m=256, d=d, D=1.0, Q=4.0)
print(f"box edge {par.l_hat:.4f}, covering estimate {par.R_hat:.4f}, delta {par.delta:.3e}")

cloud = pl.sample_points(256, d, par.l_hat, seed=0)
print("max box overlap:", pl.overlap_count(cloud))

# Q_3 elements on a 32 x 32 grid
space = pl.FeSpace(pl.Grid(d, 32), 3)
G = pl.build_averaging_operator(space, cloud)
data = pl.data_values(cloud, u, "exact_average")

system = pl.assemble_system(space, 1.0, math.pi**2, f_guess, G, data, par.delta)
report = pl.solve(system)
print(f"CG: {report.iterations} iterations, residual {report.residual:.1e}")

print("L2 error of the regularised fit:", pl.l2_error(space, report.solution, u))

# the PDE alone, with the wrong source, is off by a factor two
plain = pl.assemble_system(space, 1.0, math.pi**2, f_guess, G, data, par.delta, data_scale=0.0)
print("L2 error without data:           ", pl.l2_error(space, pl.solve(plain).solution, u))

# the fit at a few points
pts = np.array([[0.1, 0.1], [0.5, 0.3], [0.9, 0.7]])
print(np.c_[pl.evaluate(space, report.solution, pts), u(pts)])
