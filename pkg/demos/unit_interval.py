"""
Problems posed on [0, 1]
========================

The solver works on [-1, 1]. A problem on [0, 1] is pulled over with
t -> (1 + t) / 2, which halves the operator and the forcing.
"""

import numpy as np

from twopoint import solve_nonlocal, transform_unit_interval
from twopoint.operators import DiagonalFamily
from twopoint.solver import unit_interval_pullback

# u' + (2 + m t) u = 1 for modes m = 1, 2, with u(0) - 0.3 u(1) = 1.
family = DiagonalFamily(2, lambda m, t: 2.0 + m * t, poly=lambda m: [2.0, float(m)])
problem = transform_unit_interval(family, lambda t: np.ones((2,) + np.shape(t)), -0.3, [1.0, 1.0])

rep = solve_nonlocal(problem, 16)
for t in (0.0, 0.25, 0.5, 1.0):
    print(f"u({t}) =", unit_interval_pullback(rep, t))

u0, u1 = unit_interval_pullback(rep, 0.0), unit_interval_pullback(rep, 1.0)
print("nonlocal condition residual:", u0 - 0.3 * u1 - 1.0)
