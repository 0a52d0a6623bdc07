"""Heuristic choice of the box edge and the regularisation weight.

Assuming ``m`` roughly uniform sites in ``[0, D]^d``, an ideal lattice
has spacing ``L = D m^{-1/d}`` and cell diameter ``R = L sqrt(d)``.
Boxes shrink the lattice cells by the volume ratio ``Q``, and the weight
balances the data and PDE terms with an overlap count taken to be one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class HeuristicParams:
    m: int
    d: int
    D: float
    Q: float
    alpha_min: float
    L_hat: float
    l_hat: float
    R_hat: float
    delta: float


def select_parameters(m: int, d: int, D: float = 1.0, Q: float = 2.0,
                      alpha_min: float = 1.0) -> HeuristicParams:
    if m < 1:
        raise ValueError("need at least one data point")
    if Q < 1:
        raise ValueError(f"volume ratio Q must be >= 1, got {Q}")
    if not alpha_min > 0:
        raise ValueError(f"alpha_min must be positive, got {alpha_min}")
    L_hat = D * m ** (-1.0 / d)
    l_hat = L_hat * Q ** (-1.0 / d)
    R_hat = L_hat * math.sqrt(d)
    delta = R_hat**2 / (math.pi**2 * alpha_min)
    return HeuristicParams(m, d, float(D), float(Q), float(alpha_min), L_hat, l_hat, R_hat, delta)
