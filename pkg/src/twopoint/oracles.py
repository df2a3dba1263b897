"""Independent reference solutions for diagonal problems.

Each mode obeys the scalar equation ``v' + lambda(t) v = f(t)``, whose
solution over ``[t0, t1]`` is written with the integrating factor

    v(t1) = exp(-Lam(t0, t1)) v0 + int exp(-Lam(s, t1)) f(s) ds,
    Lam(a, b) = int_a^b lambda.

Both integrals are evaluated by composite 10-point Gauss-Legendre
quadrature and checked against a run with doubled panels. The two-point
condition is handled with the evolution-operator representation

    v(-1) = (phi - alpha g) / (1 + alpha U),  U = exp(-Lam(-1, 1)),
    g = int exp(-Lam(s, 1)) f(s) ds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import gauss_legendre
from .mesh import cgl_mesh
from .operators import NonlocalProblem, sample_forcing

__all__ = [
    "OracleResolutionError",
    "SingularProblemError",
    "OracleResult",
    "exact_heat_solution",
    "mode_ivp_oracle",
    "nonlocal_oracle",
]

PANEL_ORDER = 10
DEFAULT_PANELS = 512
RESOLUTION_TOL = 1e-9


class OracleResolutionError(RuntimeError):
    """Doubling the panel count changed the answer by more than the tolerance."""


class SingularProblemError(ArithmeticError):
    """``1 + alpha U`` vanishes for some mode."""


@dataclass
class OracleResult:
    """Oracle values at ``times`` (shape ``(len(times), modes)``)."""

    times: np.ndarray
    values: np.ndarray
    estimated_accuracy: float


def exact_heat_solution(x, t):
    """``exp(-pi^2 (1 + t)) sin(pi x)``."""
    return np.exp(-np.pi**2 * (1.0 + np.asarray(t, dtype=float))) * np.sin(np.pi * np.asarray(x, dtype=float))


def _scalar_fn(fn):
    """Return a callable evaluating ``fn`` on an array of times."""
    def call(ts):
        try:
            out = np.asarray(fn(ts), dtype=float)
            if out.shape == ts.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(fn(float(s))) for s in ts.reshape(-1)]).reshape(ts.shape)

    return call


def _propagate(lam, forcing, v0, t0, t1, panels):
    """Propagate ``v' + lam v = f`` over [t0, t1]; ``lam``/``forcing`` act on arrays.

    ``v0`` may be a vector of initial values sharing the same coefficients.
    Returns ``(v(t1), U, g)`` with ``U = exp(-Lam(t0, t1))`` and
    ``g = int exp(-Lam(s, t1)) f(s) ds``.
    """
    x, w = gauss_legendre(PANEL_ORDER)
    edges = np.linspace(t0, t1, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    s = a + half * (x + 1.0)  # (P, Q)
    ws = half * w
    panel_int = (ws * lam(s)).sum(axis=1)  # int over each panel
    # int_s^{b_p} lam for every node s of panel p
    sub_half = 0.5 * (b - s)  # (P, Q)
    sub_nodes = s[..., None] + sub_half[..., None] * (x + 1.0)  # (P, Q, Q)
    tail = (sub_half[..., None] * w * lam(sub_nodes)).sum(axis=2)
    # int_{b_p}^{t1} lam
    after = np.concatenate([np.cumsum(panel_int[::-1])[::-1][1:], [0.0]])
    exponent = tail + after[:, None]
    g = float((ws * np.exp(-exponent) * forcing(s)).sum())
    big_u = float(np.exp(-panel_int.sum()))
    return big_u * np.asarray(v0, dtype=float) + g, big_u, g


def mode_ivp_oracle(lambda_fn, forcing_fn, v0: float, t0: float, t1: float, panels: int = DEFAULT_PANELS,
                    return_accuracy: bool = False):
    """``v(t1)`` for ``v' + lambda(t) v = f(t)``, ``v(t0) = v0``.

    Raises :class:`OracleResolutionError` when the doubled-panel run differs
    by more than ``1e-9`` (relative to ``max(1, |v|)``).
    """
    if not t0 < t1:
        raise ValueError("need t0 < t1")
    if panels < 64:
        raise ValueError("panels must be at least 64")
    lam, f = _scalar_fn(lambda_fn), _scalar_fn(forcing_fn)
    coarse = _propagate(lam, f, v0, t0, t1, panels)[0]
    fine = _propagate(lam, f, v0, t0, t1, 2 * panels)[0]
    acc = abs(fine - coarse)
    if acc > RESOLUTION_TOL * max(1.0, abs(fine)):
        raise OracleResolutionError(f"IVP oracle unresolved with {panels} panels (change {acc:.3e})")
    return (float(fine), acc) if return_accuracy else float(fine)


def _nonlocal_pass(problem, times, panels):
    fam = problem.family
    modes = fam.modes
    dim = problem.dim

    def forcing_all(s):
        return sample_forcing(problem.forcing, s.reshape(-1), dim).reshape(s.shape + (dim,))

    values = np.empty((len(times), modes))
    for m in range(modes):
        mm = m + 1

        def lam(s, mm=mm):
            return fam.eigenvalue(mm, s)

        def f(s, m=m):
            return forcing_all(s)[..., m]

        _, big_u, g = _propagate(lam, f, 0.0, -1.0, 1.0, panels)
        corner = 1.0 + problem.alpha * big_u
        if abs(corner) < 1e-12:
            raise SingularProblemError(f"1 + alpha*U vanishes for mode {mm}")
        v = (problem.phi[m] - problem.alpha * g) / corner
        values[0, m] = v
        for i in range(1, len(times)):
            v = _propagate(lam, f, v, times[i - 1], times[i], panels)[0]
            values[i, m] = v
    return values


def nonlocal_oracle(problem: NonlocalProblem, panels: int = DEFAULT_PANELS, times=None,
                    n: int | None = None) -> OracleResult:
    """Reference solution of a diagonal two-point problem.

    Values are returned at ``times`` (increasing, starting at -1), or at the
    CGL nodes of degree ``n``. The run is repeated with doubled panels and
    the difference is reported as ``estimated_accuracy``.
    """
    if not problem.family.diagonal:
        raise TypeError("the nonlocal oracle handles diagonal families only")
    if times is None:
        if n is None:
            raise ValueError("give either times or n")
        times = cgl_mesh(n).nodes
    times = np.asarray(times, dtype=float)
    if times[0] != -1.0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must start at -1 and increase")
    coarse = _nonlocal_pass(problem, times, panels)
    fine = _nonlocal_pass(problem, times, 2 * panels)
    acc = float(np.abs(fine - coarse).max())
    if acc > RESOLUTION_TOL * max(1.0, float(np.abs(fine).max())):
        raise OracleResolutionError(f"nonlocal oracle unresolved with {panels} panels (change {acc:.3e})")
    return OracleResult(times=times, values=fine, estimated_accuracy=acc)
