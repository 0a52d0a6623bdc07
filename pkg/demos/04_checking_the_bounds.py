"""
Checking the error bounds numerically
=====================================

The Poincare-type estimates behind the error analysis become exact
inequalities once the boxes tile the domain, since overlap, mismatch and
covering diameter are then known.
"""

import math

from pdelearn import dataterm, oracle
from pdelearn.fespace import FeSpace, cosine_sum
from pdelearn.grid import Grid

# cos(pi x) is the extremal function of the Poincare inequality on (0, 1)
lhs, rhs, ok = oracle.check_poincare([0.0], [1.0], cosine_sum(1))
print(f"||v - mean|| = {lhs:.6f}, bound = {rhs:.6f}, holds: {ok}")

# data-dependent coercivity on a 4 x 4 tiling
space = FeSpace(Grid(2, 8), 2)
slack, const = oracle.check_data_coercivity(space, dataterm.tiled_cloud(2, 4))
print(f"worst slack {slack:.2e}, Gamma = {const.Gamma:.4f} = delta = {const.delta:.4f}")

# error against Gamma * E_pde + discretisation floor
for eps, err, bound in oracle.check_error_estimate(FeSpace(Grid(1, 32), 2), nu=8):
    print(f"eps={eps:<6g} error={err:.4e} bound={bound:.4e}")

# a rough coefficient mismatch has no L2 bound: the ratio grows like sqrt(6/eps)
for eps, integral, norm, ratio in oracle.demo_rough_coefficient([0.4, 0.1, 0.025, 0.00625]):
    print(f"eps={eps:<8g} integral={integral:.3f} ratio={ratio:.3f} sqrt(6/eps)={math.sqrt(6 / eps):.3f}")

print(oracle.format_report(oracle.run_suite()))
