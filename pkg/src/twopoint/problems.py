"""Ready-made problems: the 1-D heat benchmark and simple test families."""

from __future__ import annotations

import numpy as np

from .operators import DiagonalFamily, NonlocalProblem

__all__ = [
    "HEAT_ALPHA",
    "heat_family",
    "heat_problem",
    "heat_forcing",
    "heat_exact_modes",
    "constant_family",
    "constant_problem",
    "affine_diagonal_problem",
]

HEAT_ALPHA = 0.5
PI2 = np.pi**2


def heat_family(modes: int = 1) -> DiagonalFamily:
    """``A(t) = -d^2/dx^2 + (1 + t)`` on (0, 1), Dirichlet, in the sine basis.

    Mode ``m`` has eigenvalue ``m^2 pi^2 + 1 + t``.
    """
    return DiagonalFamily(
        modes,
        lambda m, t: m**2 * PI2 + 1.0 + t,
        poly=lambda m: [m**2 * PI2 + 1.0, 1.0],
    )


def _first_mode(values, modes):
    values = np.asarray(values, dtype=float)
    out = np.zeros((modes,) + values.shape)
    out[0] = values
    return out


def heat_forcing(modes: int = 1):
    def forcing(t):
        t = np.asarray(t, dtype=float)
        return _first_mode(np.exp(-PI2 * (1.0 + t)) * (1.0 + t), modes)

    return forcing


def heat_exact_modes(modes: int = 1):
    def exact(t):
        return _first_mode(np.exp(-PI2 * (1.0 + np.asarray(t, dtype=float))), modes)

    return exact


def heat_problem(modes: int = 1, alpha: float = HEAT_ALPHA) -> NonlocalProblem:
    """``u_t - u_xx + (1 + t) u = f`` with ``u(x,-1) + alpha u(x,1) = phi(x)``.

    Forcing ``f = exp(-pi^2 (1+t)) sin(pi x) (1+t)`` and datum
    ``phi = (1 + alpha exp(-2 pi^2)) sin(pi x)`` make
    ``u = exp(-pi^2 (1+t)) sin(pi x)`` the exact solution, so only the
    first sine mode is excited.
    """
    phi = np.zeros(modes)
    phi[0] = 1.0 + alpha * np.exp(-2.0 * PI2)
    return NonlocalProblem(
        family=heat_family(modes),
        forcing=heat_forcing(modes),
        alpha=alpha,
        phi=phi,
        exact=heat_exact_modes(modes),
    )


def constant_family(lam) -> DiagonalFamily:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    return DiagonalFamily(lam.size, lambda m, t: lam[np.asarray(m) - 1] + 0.0 * np.asarray(t),
                          poly=lambda m: [lam[m - 1]])


def constant_problem(lam, alpha, phi, forcing_value=0.0) -> NonlocalProblem:
    """Constant eigenvalues and constant forcing; the exact solution is closed-form."""
    fam = constant_family(lam)
    lam_v = np.atleast_1d(np.asarray(lam, dtype=float))
    c = np.broadcast_to(np.asarray(forcing_value, dtype=float), lam_v.shape).copy()
    phi = np.broadcast_to(np.asarray(phi, dtype=float), lam_v.shape).copy()
    steady = c / lam_v
    # v = steady + (v0 - steady) e^{-lam (t+1)},  v0 + alpha v(1) = phi
    decay = np.exp(-2.0 * lam_v)
    with np.errstate(divide="ignore", invalid="ignore"):
        v0 = (phi - alpha * steady * (1.0 - decay)) / (1.0 + alpha * decay)

    def exact(t):
        t = np.asarray(t, dtype=float)
        shape = (-1,) + (1,) * t.ndim
        return steady.reshape(shape) + (v0 - steady).reshape(shape) * np.exp(-lam_v.reshape(shape) * (t + 1.0))

    def forcing(t):
        t = np.asarray(t, dtype=float)
        return c.reshape((-1,) + (1,) * t.ndim) + 0.0 * t

    return NonlocalProblem(family=fam, forcing=forcing, alpha=alpha, phi=phi, exact=exact)


def affine_diagonal_problem(rng: np.random.Generator, modes: int = 3, lam_range=(1.0, 20.0),
                            slope: float = 2.0, alpha_max: float = 0.9) -> NonlocalProblem:
    """Random positive family ``lambda(m, t) = a_m + b_m t`` with smooth forcing.

    ``a_m > |b_m| + 0.5`` keeps every eigenvalue positive on [-1, 1]. The
    forcing in each mode is ``c_m cos(w_m t + p_m) + e_m``.
    """
    a = rng.uniform(*lam_range, size=modes)
    b = rng.uniform(-slope, slope, size=modes)
    b = np.clip(b, -(a - 0.5), a - 0.5)
    c, w, p, e = (rng.uniform(-1, 1, modes), rng.uniform(0.5, 3, modes), rng.uniform(0, np.pi, modes),
                  rng.uniform(-1, 1, modes))
    alpha = float(rng.uniform(-alpha_max, alpha_max))
    phi = rng.uniform(-1, 1, size=modes)
    fam = DiagonalFamily(modes, lambda m, t: a[np.asarray(m) - 1] + b[np.asarray(m) - 1] * t,
                         poly=lambda m: [a[m - 1], b[m - 1]])

    def forcing(t):
        t = np.asarray(t, dtype=float)
        sh = (-1,) + (1,) * t.ndim
        return c.reshape(sh) * np.cos(w.reshape(sh) * t + p.reshape(sh)) + e.reshape(sh)

    return NonlocalProblem(family=fam, forcing=forcing, alpha=alpha, phi=phi)
