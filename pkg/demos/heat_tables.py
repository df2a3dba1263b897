"""
Heat equation error tables
==========================

The built-in benchmark is u_t - u_xx + (1 + t) u = f on (0, 1) x (-1, 1)
with u(x, -1) + 0.5 u(x, 1) = phi(x). Its exact solution is
u = sin(pi x) exp(-pi^2 t), so only the first sine mode is excited and
the whole problem reduces to one scalar ODE with a two-point condition.
"""

import numpy as np

from twopoint import heat_problem, solve_nonlocal
from twopoint.benchmarks import HEAT_REFERENCE_ERRORS

problem = heat_problem()
print("alpha =", problem.alpha, " phi =", problem.phi)

# %%
# Solve on CGL meshes of growing degree. Every report carries the nodal
# values and, because the exact solution is known, the nodal errors.
for n in (4, 6, 8, 12, 16):
    rep = solve_nonlocal(problem, n)
    print(f"\nn = {n}: {rep.iterations} iterations, q = {rep.contraction_q:.3e}")
    print("        t        error      reference")
    for (t_ref, e_ref), t, e in zip(HEAT_REFERENCE_ERRORS[n], rep.mesh.nodes, rep.errors_at_nodes):
        print(f"  {t:+.6f}  {e:.6e}  {e_ref:.6e}")

# %%
# The error at t = -1 is alpha times the error at t = +1. That follows from
# the nonlocal condition, which the discrete solution satisfies exactly.
rep = solve_nonlocal(problem, 8)
e = rep.errors_at_nodes
print("\nerror(-1) / error(+1) =", e[0] / e[-1])
