"""Time-dependent strongly positive operator families and their exponentials.

Two finite-dimensional realizations are provided:

* :class:`DiagonalFamily` stores ``A(t)`` through its eigenvalues
  ``lambda(m, t)`` in a fixed eigenbasis (e.g. the sine modes of the heat
  equation), so every exponential is a vector of scalar exponentials.
* :class:`DenseFamily` stores ``A(t)`` as a ``d x d`` matrix.

State vectors are 1-D arrays of length ``family.dim``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg

__all__ = [
    "DiagonalFamily",
    "DenseFamily",
    "NonlocalProblem",
    "OperatorEvaluationError",
    "StrongPositivityError",
    "eval_operator",
    "exp_action",
    "exp_operator",
    "omega_lower_bound",
    "wellposedness_margin",
    "sample_forcing",
]

logger = logging.getLogger(__name__)

DEFAULT_OMEGA_SAMPLES = 256


class StrongPositivityError(ValueError):
    """The family has a nonpositive eigenvalue (or symmetric-part eigenvalue)."""


class OperatorEvaluationError(ValueError):
    """The family produced a non-finite operator."""


class DiagonalFamily:
    """Operator family diagonal in a fixed basis of ``modes`` eigenvectors.

    Parameters
    ----------
    modes : int
        Number of retained modes ``M``.
    eigenvalue : callable
        ``eigenvalue(m, t)`` with ``m`` in ``1..M``. Should broadcast over
        numpy arrays; scalar-only callables are vectorized automatically.
    poly : callable, optional
        ``poly(m)`` returning ascending coefficients of ``lambda(m, t)`` as a
        polynomial in ``t``. When given, the coupling coefficients can be
        integrated exactly instead of by quadrature.
    """

    diagonal = True

    def __init__(self, modes: int, eigenvalue: Callable, poly: Optional[Callable] = None):
        if modes < 1:
            raise ValueError("a diagonal family needs at least one mode")
        self.modes = int(modes)
        self._eigenvalue = eigenvalue
        self.poly = poly
        self._omega = None

    @property
    def dim(self) -> int:
        return self.modes

    def eigenvalues(self, t) -> np.ndarray:
        """Eigenvalues at time(s) ``t``; shape ``(M,) + np.shape(t)``."""
        t = np.asarray(t, dtype=float)
        m = np.arange(1, self.modes + 1).reshape((-1,) + (1,) * t.ndim)
        shape = (self.modes,) + t.shape
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", DeprecationWarning)
                lam = np.asarray(self._eigenvalue(m, t[None, ...]), dtype=float)
            lam = np.broadcast_to(lam, shape)
        except (TypeError, ValueError, DeprecationWarning):
            lam = np.vectorize(lambda mm, tt: float(self._eigenvalue(int(mm), tt)))(m, t[None, ...])
        return np.array(lam, dtype=float)

    def eigenvalue(self, m: int, t) -> np.ndarray:
        """Eigenvalue of mode ``m`` at time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", DeprecationWarning)
                lam = np.broadcast_to(np.asarray(self._eigenvalue(m, t), dtype=float), t.shape)
        except (TypeError, ValueError, DeprecationWarning):
            lam = np.vectorize(lambda tt: float(self._eigenvalue(m, tt)))(t)
        return np.array(lam, dtype=float)

    def poly_coeffs(self) -> Optional[list]:
        """Per-mode ascending polynomial coefficients, or None."""
        if self.poly is None:
            return None
        return [np.atleast_1d(np.asarray(self.poly(m), dtype=float)) for m in range(1, self.modes + 1)]

    @property
    def omega(self) -> float:
        if self._omega is None:
            omega_lower_bound(self)
        return self._omega

    def __repr__(self):
        return f"DiagonalFamily(modes={self.modes})"


class DenseFamily:
    """Matrix-valued operator family ``t -> A(t)`` of size ``d x d``."""

    diagonal = False

    def __init__(self, dim: int, matrix: Callable, symmetric: bool = False):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self._dim = int(dim)
        self._matrix = matrix
        self.symmetric = bool(symmetric)
        self._omega = None

    @property
    def dim(self) -> int:
        return self._dim

    def matrix(self, t: float) -> np.ndarray:
        a = np.array(self._matrix(float(t)), dtype=float)
        if a.shape != (self._dim, self._dim):
            raise OperatorEvaluationError(
                f"matrix at t={t} has shape {a.shape}, expected {(self._dim, self._dim)}"
            )
        return a

    @property
    def omega(self) -> float:
        if self._omega is None:
            omega_lower_bound(self)
        return self._omega

    def __repr__(self):
        return f"DenseFamily(dim={self._dim}, symmetric={self.symmetric})"


Family = Union[DiagonalFamily, DenseFamily]


@dataclass
class NonlocalProblem:
    """``v' + A(t) v = f(t)`` on [-1, 1] with ``v(-1) + alpha v(1) = phi``.

    ``forcing(t)`` and ``exact(t)`` return state vectors of length
    ``family.dim``. ``smooth_forcing=False`` declares a merely continuous
    forcing, for which quadrature accuracy is not guaranteed.
    """

    family: Family
    forcing: Callable
    alpha: float
    phi: np.ndarray
    exact: Optional[Callable] = None
    smooth_forcing: bool = True

    def __post_init__(self):
        self.phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        self.alpha = float(self.alpha)
        d = self.family.dim
        if self.phi.shape != (d,):
            raise ValueError(f"phi has shape {self.phi.shape}, family dimension is {d}")
        f0 = np.atleast_1d(np.asarray(self.forcing(0.0), dtype=float))
        if f0.shape != (d,):
            raise ValueError(f"forcing returns shape {f0.shape}, family dimension is {d}")
        if not self.smooth_forcing:
            logger.warning("forcing declared non-smooth: quadrature accuracy is degraded")

    @property
    def dim(self) -> int:
        return self.family.dim


def sample_forcing(forcing: Callable, ts, dim: int) -> np.ndarray:
    """Evaluate a state-valued function on an array of times; shape ``(N, dim)``.

    A vectorized call ``forcing(ts)`` returning ``(dim, N)`` is used when the
    callable supports it, otherwise the points are evaluated one by one.
    """
    ts = np.asarray(ts, dtype=float).reshape(-1)
    try:
        with np.errstate(all="ignore"):
            out = np.asarray(forcing(ts), dtype=float)
        if out.shape == (dim, ts.size):
            return out.T.copy()
    except (TypeError, ValueError):
        pass
    return np.array([np.atleast_1d(np.asarray(forcing(float(s)), dtype=float)) for s in ts]).reshape(
        ts.size, dim
    )


def eval_operator(family: Family, t: float) -> np.ndarray:
    """The operator frozen at time ``t``: eigenvalue vector or matrix."""
    if family.diagonal:
        out = family.eigenvalues(float(t))
    else:
        out = family.matrix(t)
    if not np.all(np.isfinite(out)):
        raise OperatorEvaluationError(f"operator at t={t} has non-finite entries")
    return out


def exp_operator(family: Family, t_eval: float, s: float) -> np.ndarray:
    """``exp(-s A(t_eval))``: per-mode factors (diagonal) or a matrix (dense)."""
    if s < 0:
        raise ValueError(f"exponential duration must be nonnegative, got {s}")
    a = eval_operator(family, t_eval)
    if family.diagonal:
        return np.exp(-s * a)
    if family.symmetric:
        lam, vec = np.linalg.eigh(0.5 * (a + a.T))
        return (vec * np.exp(-s * lam)) @ vec.T
    return scipy.linalg.expm(-s * a)


def exp_action(family: Family, t_eval: float, s: float, v) -> np.ndarray:
    """Apply ``exp(-s A(t_eval))`` to the state vector ``v``."""
    v = np.asarray(v, dtype=float)
    e = exp_operator(family, t_eval, s)
    return e * v if family.diagonal else e @ v


def omega_lower_bound(family: Family, t_samples: int = DEFAULT_OMEGA_SAMPLES) -> float:
    """Sampled estimate of the decay rate ``omega`` and cache it on the family.

    For a diagonal family this is the minimum eigenvalue over the modes and a
    uniform time grid. For a dense family it is the minimum eigenvalue of the
    symmetric part of ``A(t)``, which bounds ``||exp(-s A)||_2`` by
    ``exp(-omega s)``.
    """
    if t_samples < 16:
        raise ValueError("need at least 16 time samples")
    ts = np.linspace(-1.0, 1.0, t_samples)
    if family.diagonal:
        omega = float(family.eigenvalues(ts).min())
    else:
        omega = min(
            float(np.linalg.eigvalsh(0.5 * (a + a.T))[0]) for a in (family.matrix(t) for t in ts)
        )
    if not omega > 0:
        raise StrongPositivityError(f"operator family is not strongly positive (omega estimate {omega:g})")
    family._omega = omega
    return omega


def wellposedness_margin(problem: NonlocalProblem) -> float:
    """``1 - |alpha| exp(-2 omega)``; positive means ``I + alpha U(1,-1)`` is invertible.

    The condition is sufficient only, so a nonpositive margin is not an error.
    """
    return 1.0 - abs(problem.alpha) * np.exp(-2.0 * problem.family.omega)
