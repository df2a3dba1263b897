"""
A non-symmetric coupled system
==============================

Dense families hold a matrix per time. Exponentials go through eigh for
symmetric matrices and a Pade scaling-and-squaring expm otherwise.
Here the exact solution v = (exp(-t), cos(t)) is manufactured.
"""

import numpy as np

from twopoint import DenseFamily, NonlocalProblem, omega_lower_bound, solve_nonlocal, wellposedness_margin


def matrix(t):
    return np.array([[3.0 + t, 0.5], [-0.5, 2.0]])


def exact(t):
    t = np.asarray(t, dtype=float)
    return np.array([np.exp(-t), np.cos(t)])


def forcing(t):
    # f = v' + A(t) v, written for scalar t; the solver samples it point by point
    dv = np.array([-np.exp(-t), -np.sin(t)])
    return dv + matrix(t) @ exact(t)


alpha = 0.25
family = DenseFamily(2, matrix)
problem = NonlocalProblem(family, forcing, alpha, exact(-1.0) + alpha * exact(1.0), exact=exact)

print("omega        =", omega_lower_bound(family))
print("margin       =", wellposedness_margin(problem))

for n in (4, 8, 12, 16):
    rep = solve_nonlocal(problem, n)
    print(f"n={n:2d}  max error {rep.max_error:.3e}  iterations {rep.iterations}")
