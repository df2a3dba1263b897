"""Discrete two-point system and its solvers.

With ``x_k`` approximating ``v(t_k)`` the system reads::

    x_0 + alpha x_n = phi
    x_k = sigma_k x_{k-1} + sum_j alpha_kj x_j + phi_k,   k = 1..n

i.e. ``S x = B x + F`` where ``S`` is block lower bidiagonal plus the corner
coupling ``alpha`` in row 0, ``B`` holds the coupling blocks (row 0 is zero)
and ``F = (phi, phi_1, ..., phi_n)``. ``S`` is inverted matrix-free by one
forward sweep and a ``d x d`` corner solve, and the fixed-point iteration
``x <- S^{-1}(B x + F)`` contracts for moderate ``n``.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
from numpy.polynomial import Polynomial

from .coefficients import CoefficientSet, compute_coefficients
from .mesh import Mesh, cgl_mesh, interpolate
from .operators import (
    DenseFamily,
    DiagonalFamily,
    NonlocalProblem,
    omega_lower_bound,
    sample_forcing,
    wellposedness_margin,
)

__all__ = [
    "SingularCornerError",
    "SingularSystemError",
    "DivergenceError",
    "ConvergenceError",
    "WellPosednessWarning",
    "ContractionWarning",
    "DiscreteSystem",
    "SolveReport",
    "assemble",
    "apply_S",
    "apply_S_inverse",
    "apply_B",
    "block_norm",
    "fixed_point_solve",
    "direct_solve",
    "solve_nonlocal",
    "transform_unit_interval",
    "unit_interval_pullback",
]

logger = logging.getLogger(__name__)

CORNER_TOL = 1e-12
MAX_DIRECT_SIZE = 100_000


class SingularCornerError(ArithmeticError):
    """``I + alpha sigma_n ... sigma_1`` is numerically singular."""


class SingularSystemError(ArithmeticError):
    """The assembled block matrix ``S - B`` is numerically singular."""


class ConvergenceError(RuntimeError):
    """The fixed-point iteration did not reach the tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DivergenceError(ConvergenceError):
    """The fixed-point iteration is not contracting."""


class WellPosednessWarning(UserWarning):
    """The sufficient invertibility condition ``|alpha| e^{-2 omega} < 1`` fails."""


class ContractionWarning(UserWarning):
    """Convergence was reached although the contraction estimate is >= 1."""


def block_norm(x) -> float:
    """``max_k ||x_k||_2`` over the blocks of a stacked state array."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x.reshape(x.shape[0], -1), axis=1).max())


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Assembled blocks of the two-point system on one mesh."""

    mesh: Mesh
    coeffs: CoefficientSet
    alpha: float
    phi: np.ndarray
    family: object
    corner_product: np.ndarray = field(init=False, repr=False)
    _corner_lu: object = field(init=False, repr=False)

    def __post_init__(self):
        sigma = self.coeffs.sigma
        if self.coeffs.diagonal:
            prod = np.prod(sigma, axis=0)
            corner = 1.0 + self.alpha * prod
            smallest = float(np.abs(corner).min())
            lu = corner
        else:
            prod = np.eye(sigma.shape[1])
            for s in sigma:
                prod = s @ prod
            corner = np.eye(prod.shape[0]) + self.alpha * prod
            smallest = float(np.linalg.svd(corner, compute_uv=False).min())
            lu = scipy.linalg.lu_factor(corner) if smallest > CORNER_TOL else None
        if not smallest > CORNER_TOL:
            raise SingularCornerError(
                f"corner factor I + alpha*sigma_n...sigma_1 is singular "
                f"(smallest singular value {smallest:.3e}, alpha={self.alpha})"
            )
        object.__setattr__(self, "corner_product", prod)
        object.__setattr__(self, "_corner_lu", lu)

    @property
    def n(self) -> int:
        return self.mesh.n

    @property
    def dim(self) -> int:
        return self.phi.shape[0]

    @property
    def diagonal(self) -> bool:
        return self.coeffs.diagonal

    def forcing_vector(self) -> np.ndarray:
        """``(phi, phi_1, ..., phi_n)`` stacked as ``(n + 1, dim)``."""
        return np.vstack([self.phi[None, :], self.coeffs.phi])

    def _apply(self, block, v):
        return block * v if self.diagonal else block @ v

    def _corner_solve(self, rhs):
        if self.diagonal:
            return rhs / self._corner_lu
        return scipy.linalg.lu_solve(self._corner_lu, rhs)


def assemble(problem: NonlocalProblem, n: int, quad_order: int | None = None,
             alpha_method: str = "auto") -> DiscreteSystem:
    """Build the discrete system for ``problem`` on the degree-``n`` CGL mesh."""
    mesh = cgl_mesh(n)
    omega_lower_bound(problem.family)
    margin = wellposedness_margin(problem)
    if margin <= 0:
        warnings.warn(
            f"well-posedness margin {margin:.3e} <= 0: invertibility of the nonlocal coupling is not "
            "guaranteed by the decay bound",
            WellPosednessWarning,
            stacklevel=2,
        )
    coeffs = compute_coefficients(mesh, problem.family, problem.forcing, quad_order, alpha_method)
    return DiscreteSystem(mesh=mesh, coeffs=coeffs, alpha=problem.alpha, phi=problem.phi.copy(),
                          family=problem.family)


def _check_blocks(system: DiscreteSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (system.n + 1, system.dim):
        raise ValueError(f"expected block vector of shape {(system.n + 1, system.dim)}, got {x.shape}")
    return x


def apply_S(system: DiscreteSystem, x) -> np.ndarray:
    """Row 0: ``x_0 + alpha x_n``; row k: ``x_k - sigma_k x_{k-1}``."""
    x = _check_blocks(system, x)
    out = np.empty_like(x)
    out[0] = x[0] + system.alpha * x[-1]
    sigma = system.coeffs.sigma
    if system.diagonal:
        out[1:] = x[1:] - sigma * x[:-1]
    else:
        out[1:] = x[1:] - np.einsum("kab,kb->ka", sigma, x[:-1])
    return out


def apply_S_inverse(system: DiscreteSystem, rhs) -> np.ndarray:
    """Solve ``S x = rhs`` by forward substitution and one corner solve."""
    rhs = _check_blocks(system, rhs)
    sigma = system.coeffs.sigma
    w = np.zeros(system.dim)
    for k in range(1, system.n + 1):
        w = system._apply(sigma[k - 1], w) + rhs[k]
    x_n = system._corner_solve(system._apply(system.corner_product, rhs[0]) + w)
    x = np.empty_like(rhs)
    x[0] = rhs[0] - system.alpha * x_n
    for k in range(1, system.n + 1):
        x[k] = system._apply(sigma[k - 1], x[k - 1]) + rhs[k]
    return x


def apply_B(system: DiscreteSystem, x) -> np.ndarray:
    """Row 0 is zero; row k is ``sum_j alpha_kj x_j``."""
    x = _check_blocks(system, x)
    out = np.zeros_like(x)
    if system.diagonal:
        out[1:] = np.einsum("kjm,jm->km", system.coeffs.alpha, x)
    else:
        out[1:] = np.einsum("kjab,jb->ka", system.coeffs.alpha, x)
    return out


@dataclass
class SolveReport:
    """Result of a two-point solve.

    ``nodal_values`` has shape ``(n + 1, dim)``. ``errors_at_nodes`` holds
    ``||x_k - v(t_k)||_2`` when an exact solution was available.
    """

    mesh: Mesh
    nodal_values: np.ndarray
    iterations: int
    contraction_q: float
    residual: float
    method: str
    errors_at_nodes: Optional[np.ndarray] = None
    increments: list = field(default_factory=list, repr=False)
    wallclock: float = 0.0

    @property
    def n(self) -> int:
        return self.mesh.n

    def evaluate(self, t):
        """Interpolated solution at ``t`` (between nodes uses the degree-n polynomial)."""
        return interpolate(self.mesh, self.nodal_values, t)

    @property
    def max_error(self) -> float:
        if self.errors_at_nodes is None:
            raise ValueError("no exact solution was supplied")
        return float(np.max(self.errors_at_nodes))


def _residual(system, x, fvec):
    return block_norm(apply_S(system, x) - apply_B(system, x) - fvec)


def _contraction_estimate(increments, floor):
    # geometric mean of the last three ratios taken above the roundoff floor
    usable = [d for d in increments if d > floor]
    ratios = [b / a for a, b in zip(usable[:-1], usable[1:])]
    if not ratios:
        return 0.0
    last = np.array(ratios[-3:])
    if np.any(last == 0):
        return 0.0
    return float(np.exp(np.mean(np.log(last))))


def fixed_point_solve(system: DiscreteSystem, tol: float = 1e-13, max_iter: int = 200) -> SolveReport:
    """Iterate ``x <- S^{-1}(B x + F)`` from ``x = S^{-1} F``.

    Stops when the max-block-norm increment is at most ``tol``. Raises
    :class:`DivergenceError` when ``max_iter`` is exhausted with a
    contraction estimate >= 1 and :class:`ConvergenceError` otherwise.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    fvec = system.forcing_vector()
    x = apply_S_inverse(system, fvec)
    increments = []
    converged = False
    for _ in range(max_iter):
        x_new = apply_S_inverse(system, apply_B(system, x) + fvec)
        increments.append(block_norm(x_new - x))
        x = x_new
        if increments[-1] <= tol:
            converged = True
            break
    floor = 64 * np.finfo(float).eps * max(block_norm(x), np.finfo(float).tiny)
    q = _contraction_estimate(increments, floor)
    report = SolveReport(mesh=system.mesh, nodal_values=x, iterations=len(increments), contraction_q=q,
                         residual=_residual(system, x, fvec), method="fixed-point", increments=increments)
    if not converged:
        if q >= 1:
            raise DivergenceError(f"fixed-point iteration diverges (q ~ {q:.3g})", report)
        raise ConvergenceError(
            f"no convergence to {tol:g} within {max_iter} iterations (last increment {increments[-1]:.3e})",
            report,
        )
    if q >= 1:
        warnings.warn(f"converged but contraction estimate is {q:.3g}", ContractionWarning, stacklevel=2)
    return report


def _dense_matrix(system: DiscreteSystem) -> np.ndarray:
    n, d = system.n, system.dim
    c = system.coeffs
    if system.diagonal:
        sigma = np.stack([np.diag(s) for s in c.sigma])
        alpha = np.stack([[np.diag(a) for a in row] for row in c.alpha])
    else:
        sigma, alpha = c.sigma, c.alpha
    big = np.zeros((n + 1, d, n + 1, d))
    eye = np.eye(d)
    big[0, :, 0, :] = eye
    big[0, :, n, :] += system.alpha * eye
    for k in range(1, n + 1):
        big[k, :, k, :] += eye
        big[k, :, k - 1, :] -= sigma[k - 1]
        big[k] -= alpha[k - 1].transpose(1, 0, 2)
    return big.reshape((n + 1) * d, (n + 1) * d)


def direct_solve(system: DiscreteSystem) -> np.ndarray:
    """Solve ``(S - B) x = F`` by dense LU with partial pivoting."""
    size = (system.n + 1) * system.dim
    if size > MAX_DIRECT_SIZE:
        raise ValueError(f"system of size {size} is too large for the direct solver")
    mat = _dense_matrix(system)
    lu, piv = scipy.linalg.lu_factor(mat, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= 1e-14 * pivots.max():
        raise SingularSystemError(f"block matrix is numerically singular (pivot ratio {pivots.min() / pivots.max():.2e})")
    x = scipy.linalg.lu_solve((lu, piv), system.forcing_vector().reshape(-1))
    return x.reshape(system.n + 1, system.dim)


def solve_nonlocal(problem: NonlocalProblem, n: int, method: str = "fixed-point", tol: float = 1e-13,
                   max_iter: int = 200, quad_order: int | None = None) -> SolveReport:
    """Assemble and solve; attach nodal errors when ``problem.exact`` is set."""
    start = time.perf_counter()
    system = assemble(problem, n, quad_order)
    if method == "fixed-point":
        report = fixed_point_solve(system, tol=tol, max_iter=max_iter)
    elif method == "direct":
        x = direct_solve(system)
        report = SolveReport(mesh=system.mesh, nodal_values=x, iterations=0, contraction_q=float("nan"),
                             residual=_residual(system, x, system.forcing_vector()), method="direct")
    else:
        raise ValueError(f"unknown method {method!r}; expected 'fixed-point' or 'direct'")
    if problem.exact is not None:
        exact = sample_forcing(problem.exact, system.mesh.nodes, problem.dim)
        report.errors_at_nodes = np.linalg.norm(report.nodal_values - exact, axis=1)
    report.wallclock = time.perf_counter() - start
    return report


def transform_unit_interval(A1, f1, alpha: float, phi, exact1=None) -> NonlocalProblem:
    """Map ``u' + A1(t) u = f1`` on [0, 1] to [-1, 1] via ``t -> (1 + t) / 2``.

    The new problem has ``A(t) = A1((1 + t)/2) / 2`` and
    ``f(t) = f1((1 + t)/2) / 2``; the nonlocal data are unchanged.
    """
    if isinstance(A1, DiagonalFamily):
        eig1, poly1 = A1._eigenvalue, A1.poly
        poly = None
        if poly1 is not None:
            half = Polynomial([0.5, 0.5])

            def poly(m):
                return (0.5 * Polynomial(np.atleast_1d(poly1(m)))(half)).coef

        family = DiagonalFamily(A1.modes, lambda m, t: 0.5 * eig1(m, 0.5 * (1.0 + np.asarray(t))), poly=poly)
    elif isinstance(A1, DenseFamily):
        family = DenseFamily(A1.dim, lambda t: 0.5 * A1.matrix(0.5 * (1.0 + t)), symmetric=A1.symmetric)
    else:
        raise TypeError(f"unsupported family {A1!r}")

    def forcing(t):
        return 0.5 * np.asarray(f1(0.5 * (1.0 + np.asarray(t))), dtype=float)

    exact = None
    if exact1 is not None:
        def exact(t):
            return exact1(0.5 * (1.0 + np.asarray(t)))

    return NonlocalProblem(family=family, forcing=forcing, alpha=alpha, phi=phi, exact=exact)


def unit_interval_pullback(report: SolveReport, t_unit):
    """Solution of the original [0, 1] problem: ``u(t') = v(2 t' - 1)``."""
    return report.evaluate(2.0 * np.asarray(t_unit, dtype=float) - 1.0)
