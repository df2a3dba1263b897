"""Exponentially convergent solver for two-point nonlocal evolution problems.

Solves ``v' + A(t) v = f(t)`` on [-1, 1] with ``v(-1) + alpha v(1) = phi``
on a Chebyshev-Gauss-Lobatto mesh using frozen-operator exponentials and a
fixed-point iteration on the resulting block system.
"""

from .coefficients import (
    CoefficientSet,
    ExpMoments,
    compute_alpha,
    compute_coefficients,
    compute_phi,
    compute_sigma,
    exp_moments,
)
from .mesh import Mesh, cgl_mesh, interpolate, lagrange_basis, lebesgue_constant
from .operators import (
    DenseFamily,
    DiagonalFamily,
    NonlocalProblem,
    eval_operator,
    exp_action,
    omega_lower_bound,
    wellposedness_margin,
)
from .oracles import exact_heat_solution, mode_ivp_oracle, nonlocal_oracle
from .problems import heat_problem
from .solver import (
    DiscreteSystem,
    SolveReport,
    apply_B,
    apply_S_inverse,
    assemble,
    direct_solve,
    fixed_point_solve,
    solve_nonlocal,
    transform_unit_interval,
)

__version__ = "0.1.0"
