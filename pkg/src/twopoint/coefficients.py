"""Coefficients of the discrete two-point system.

For each subinterval ``[t_{k-1}, t_k]`` with frozen operator ``A_k = A(t_k)``:

* ``sigma_k = exp(-A_k tau_k)``
* ``alpha_kj = int exp(-A_k (t_k - s)) (A_k - A(s)) L_j(s) ds``
* ``phi_k = int exp(-A_k (t_k - s)) f(s) ds``

Integrals are computed by Gauss-Legendre quadrature mapped to the
subinterval. For diagonal families whose eigenvalues are polynomial in ``t``
the coupling integrals also have an exact path through the exponential
moments ``mu_p = int_0^tau u^p exp(-lambda u) du``.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .mesh import Mesh, lagrange_basis
from .operators import eval_operator, exp_operator, sample_forcing

__all__ = [
    "ExpMoments",
    "CoefficientSet",
    "CoefficientMismatchError",
    "QuadratureAccuracyWarning",
    "gauss_legendre",
    "default_quad_order",
    "exp_moments",
    "compute_sigma",
    "compute_alpha",
    "compute_phi",
    "compute_coefficients",
]

SERIES_CROSSOVER = 1e-3
PHI_CHECK_RTOL = 1e-11


class CoefficientMismatchError(RuntimeError):
    """Quadrature and exact coupling coefficients disagree."""


class QuadratureAccuracyWarning(UserWarning):
    """Doubling the quadrature order changed a forcing integral noticeably."""


@functools.lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _mapped_rule(a: float, b: float, order: int):
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def default_quad_order(n: int) -> int:
    return max(2 * n + 16, 32)


@dataclass(frozen=True)
class ExpMoments:
    """``mu[p] = int_0^tau u^p exp(-lam u) du`` for ``p = 0..p_max``."""

    lam: float
    tau: float
    mu: np.ndarray


def _moments_alternating(lam, tau, p_max):
    # tau^{p+1} sum_i (-x)^i / (i! (p+1+i)); fine for x << 1
    x = lam * tau
    mu = np.empty(p_max + 1)
    for p in range(p_max + 1):
        total, term, i = 0.0, 1.0, 0
        while True:
            contrib = term / (p + 1 + i)
            total += contrib
            if abs(contrib) <= 1e-17 * abs(total):
                break
            i += 1
            term *= -x / i
        mu[p] = tau ** (p + 1) * total
    return mu


def _moment_positive(lam, tau, p):
    # lower incomplete gamma series, all terms positive; converges fast for p > x
    x = lam * tau
    total, term, r = 0.0, 1.0 / (p + 1), p + 1
    while True:
        total += term
        r += 1
        term *= x / r
        if term <= 1e-17 * total:
            break
    return tau ** (p + 1) * math.exp(-x) * total


def _moments_upward(lam, tau, p_max):
    x = lam * tau
    ex = math.exp(-x)
    mu = np.empty(p_max + 1)
    mu[0] = -math.expm1(-x) / lam
    for p in range(1, p_max + 1):
        mu[p] = (p * mu[p - 1] - tau**p * ex) / lam
    return mu


def exp_moments(lam: float, tau: float, p_max: int) -> ExpMoments:
    """Exponential moments ``int_0^tau u^p exp(-lam u) du``, ``p = 0..p_max``.

    Uses the alternating series for ``lam * tau < 1e-3``. Above that, the
    upward recurrence ``mu_p = (p mu_{p-1} - tau^p exp(-lam tau)) / lam`` is
    used while ``p <= lam * tau`` (where it is stable) and the positive
    incomplete-gamma series for larger ``p``.
    """
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if not 0 <= p_max <= 64:
        raise ValueError(f"p_max must lie in [0, 64], got {p_max}")
    lam, tau = float(lam), float(tau)
    p = np.arange(p_max + 1)
    x = lam * tau
    if lam == 0.0:
        mu = tau ** (p + 1.0) / (p + 1.0)
    elif x < SERIES_CROSSOVER:
        mu = _moments_alternating(lam, tau, p_max)
    else:
        stable = min(p_max, int(math.floor(x)))
        mu = np.empty(p_max + 1)
        mu[: stable + 1] = _moments_upward(lam, tau, stable)
        for q in range(stable + 1, p_max + 1):
            mu[q] = _moment_positive(lam, tau, q)
    mu = np.asarray(mu, dtype=float)
    mu.setflags(write=False)
    return ExpMoments(lam=lam, tau=tau, mu=mu)


@dataclass(frozen=True)
class CoefficientSet:
    """Blocks of the discrete system.

    For a diagonal family of ``M`` modes the shapes are ``sigma (n, M)``,
    ``alpha (n, n+1, M)`` and ``phi (n, M)``; for a dense family of
    dimension ``d`` they are ``(n, d, d)``, ``(n, n+1, d, d)`` and ``(n, d)``.
    Row ``k-1`` holds the blocks of subinterval ``k``.
    """

    sigma: np.ndarray
    alpha: np.ndarray
    phi: np.ndarray
    diagonal: bool


def compute_sigma(mesh: Mesh, family) -> np.ndarray:
    """Propagators ``exp(-A(t_k) tau_k)``, k = 1..n, stacked on axis 0."""
    return np.stack(
        [exp_operator(family, mesh.nodes[k], mesh.steps[k - 1]) for k in range(1, mesh.n + 1)]
    )


def _alpha_quadrature(mesh: Mesh, family, quad_order: int) -> np.ndarray:
    n = mesh.n
    blocks = []
    for k in range(1, n + 1):
        a, b = mesh.nodes[k - 1], mesh.nodes[k]
        s, w = _mapped_rule(a, b, quad_order)
        u = b - s
        basis = lagrange_basis(mesh, s)  # (Q, n+1)
        if family.diagonal:
            lam_k = eval_operator(family, b)
            lam_s = family.eigenvalues(s)  # (M, Q)
            g = w * np.exp(-lam_k[:, None] * u) * (lam_k[:, None] - lam_s)
            blocks.append(basis.T @ g.T)
        else:
            a_k = eval_operator(family, b)
            g = np.stack(
                [wq * exp_operator(family, b, uq) @ (a_k - eval_operator(family, sq)) for sq, uq, wq in zip(s, u, w)]
            )
            blocks.append(np.einsum("qj,qab->jab", basis, g))
    return np.stack(blocks)


def _alpha_exact(mesh: Mesh, family) -> np.ndarray:
    coeffs = family.poly_coeffs()
    if coeffs is None:
        raise ValueError("exact coupling path needs a family with polynomial eigenvalues")
    n, t = mesh.n, mesh.nodes
    out = np.empty((n, n + 1, family.modes))
    for k in range(1, n + 1):
        tk, tau = t[k], mesh.steps[k - 1]
        shift = Polynomial([tk, -1.0])  # s = t_k - u
        # L_j(t_k - u) as a polynomial in u
        basis_u = []
        for j in range(n + 1):
            others = np.delete(t, j)
            scale = (-1.0) ** n / np.prod(t[j] - others)
            basis_u.append(Polynomial.fromroots(tk - others) * scale)
        for m, c in enumerate(coeffs):
            lam_poly = Polynomial(c)
            lam_k = float(lam_poly(tk))
            gap = lam_k - lam_poly(shift)  # A_k - A(s) in u
            mu = exp_moments(lam_k, tau, n + gap.degree()).mu
            for j in range(n + 1):
                prod = (gap * basis_u[j]).coef
                out[k - 1, j, m] = float(np.dot(prod, mu[: prod.size]))
    return out


def compute_alpha(mesh: Mesh, family, quad_order: int | None = None, method: str = "auto",
                  check_tol: float = 1e-10) -> np.ndarray:
    """Coupling blocks ``alpha_kj`` for k = 1..n, j = 0..n.

    ``method`` is ``"quadrature"``, ``"exact"`` (diagonal families with
    polynomial eigenvalues), ``"auto"`` (exact when available) or
    ``"both"``, which computes both and raises
    :class:`CoefficientMismatchError` if they differ by more than
    ``check_tol`` relative to the largest entry.
    """
    if quad_order is None:
        quad_order = default_quad_order(mesh.n)
    if quad_order < mesh.n + 2:
        raise ValueError(f"quad_order must be at least n + 2 = {mesh.n + 2}")
    has_exact = family.diagonal and family.poly is not None
    if method == "auto":
        method = "exact" if has_exact else "quadrature"
    if method == "quadrature":
        return _alpha_quadrature(mesh, family, quad_order)
    if method == "exact":
        return _alpha_exact(mesh, family)
    if method == "both":
        quad = _alpha_quadrature(mesh, family, quad_order)
        exact = _alpha_exact(mesh, family)
        scale = max(float(np.abs(exact).max()), np.finfo(float).tiny)
        gap = float(np.abs(quad - exact).max())
        if gap > check_tol * scale:
            raise CoefficientMismatchError(
                f"quadrature and exact coupling coefficients differ by {gap:.3e} (scale {scale:.3e})"
            )
        return exact
    raise ValueError(f"unknown method {method!r}")


def _phi_at_order(mesh: Mesh, family, forcing, order: int) -> np.ndarray:
    n, d = mesh.n, family.dim
    rules = [_mapped_rule(mesh.nodes[k - 1], mesh.nodes[k], order) for k in range(1, n + 1)]
    s_all = np.concatenate([r[0] for r in rules])
    f_all = sample_forcing(forcing, s_all, d).reshape(n, order, d)
    if not np.all(np.isfinite(f_all)):
        raise ValueError("forcing returned non-finite values")
    out = np.empty((n, d))
    for k in range(1, n + 1):
        s, w = rules[k - 1]
        b = mesh.nodes[k]
        u = b - s
        if family.diagonal:
            lam_k = eval_operator(family, b)
            out[k - 1] = np.einsum("q,qm->m", w, np.exp(-np.outer(u, lam_k)) * f_all[k - 1])
        else:
            out[k - 1] = sum(wq * exp_operator(family, b, uq) @ fq for uq, wq, fq in zip(u, w, f_all[k - 1]))
    return out


def compute_phi(mesh: Mesh, family, forcing, quad_order: int | None = None) -> np.ndarray:
    """Forcing integrals ``phi_k``, shape ``(n, dim)``.

    The integrals are recomputed at twice the order; if the two disagree by
    more than ``1e-11`` relative to the largest entry a
    :class:`QuadratureAccuracyWarning` is issued.
    """
    if quad_order is None:
        quad_order = default_quad_order(mesh.n)
    if quad_order < mesh.n + 2:
        raise ValueError(f"quad_order must be at least n + 2 = {mesh.n + 2}")
    phi = _phi_at_order(mesh, family, forcing, quad_order)
    check = _phi_at_order(mesh, family, forcing, 2 * quad_order)
    scale = float(np.abs(check).max())
    gap = float(np.abs(phi - check).max())
    if gap > PHI_CHECK_RTOL * scale:
        warnings.warn(
            f"forcing integrals changed by {gap:.3e} (relative {gap / scale:.3e}) when the quadrature "
            f"order was doubled from {quad_order}",
            QuadratureAccuracyWarning,
            stacklevel=2,
        )
    return phi


def compute_coefficients(mesh: Mesh, family, forcing, quad_order: int | None = None,
                         alpha_method: str = "auto") -> CoefficientSet:
    return CoefficientSet(
        sigma=compute_sigma(mesh, family),
        alpha=compute_alpha(mesh, family, quad_order, method=alpha_method),
        phi=compute_phi(mesh, family, forcing, quad_order),
        diagonal=family.diagonal,
    )
