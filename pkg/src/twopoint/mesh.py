"""Chebyshev-Gauss-Lobatto time mesh and Lagrange interpolation on it.

Interpolation uses the barycentric form with the closed-form CGL weights
``w_j = (-1)^j c_j`` (``c_0 = c_n = 1/2``, otherwise 1), which is stable
close to the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InvalidDegreeError",
    "Mesh",
    "cgl_mesh",
    "lagrange_basis",
    "interpolate",
    "lebesgue_constant",
]

# Distance below which an evaluation point is snapped to a node.
NODE_SNAP = 1e-14


class InvalidDegreeError(ValueError):
    """Raised for a polynomial degree the mesh cannot be built for."""


@dataclass(frozen=True)
class Mesh:
    """Nodes ``t_0 < ... < t_n`` on [-1, 1] and the steps between them."""

    n: int
    nodes: np.ndarray
    steps: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} nodes, got shape {nodes.shape}")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        w = (-1.0) ** np.arange(self.n + 1)
        w[0] *= 0.5
        w[-1] *= 0.5
        nodes.setflags(write=False)
        steps = np.diff(nodes)
        steps.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.n + 1


def cgl_mesh(n: int) -> Mesh:
    """Return the CGL mesh ``t_k = cos((n - k) pi / n)``, k = 0..n.

    The nodes are symmetrized explicitly so that ``t_k == -t_{n-k}`` holds
    bitwise and the midpoint (even n) is exactly zero.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 2:
        raise InvalidDegreeError(f"polynomial degree must be an integer >= 2, got {n!r}")
    n = int(n)
    k = np.arange(n + 1)
    # sin form is antisymmetric in k about n/2 by construction
    nodes = -np.sin(np.pi * (n - 2 * k) / (2 * n))
    nodes[0], nodes[-1] = -1.0, 1.0
    nodes += 0.0  # no negative zero at the midpoint
    return Mesh(n=n, nodes=nodes)


def lagrange_basis(mesh: Mesh, t) -> np.ndarray:
    """Values of the Lagrange fundamental polynomials at ``t``.

    Parameters
    ----------
    mesh : Mesh
    t : float or array_like
        Evaluation point(s) in [-1, 1].

    Returns
    -------
    ndarray
        Shape ``(n + 1,)`` for scalar ``t``, otherwise ``t.shape + (n + 1,)``.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    tt = np.atleast_1d(t).reshape(-1)
    diff = tt[:, None] - mesh.nodes[None, :]
    hit = np.abs(diff) < NODE_SNAP
    on_node = hit.any(axis=1)
    out = np.empty_like(diff)
    if np.any(~on_node):
        q = mesh.weights / diff[~on_node]
        out[~on_node] = q / q.sum(axis=1, keepdims=True)
    if np.any(on_node):
        idx = np.argmax(hit[on_node], axis=1)
        unit = np.zeros((idx.size, mesh.n + 1))
        unit[np.arange(idx.size), idx] = 1.0
        out[on_node] = unit
    if scalar:
        return out[0]
    return out.reshape(t.shape + (mesh.n + 1,))


def interpolate(mesh: Mesh, values, t) -> np.ndarray:
    """Evaluate ``sum_j values[j] * L_j(t)``.

    ``values`` holds one state vector per node, shape ``(n + 1, d)`` (or
    ``(n + 1,)`` for scalar data).
    """
    if isinstance(values, (list, tuple)):
        sizes = {np.size(v) for v in values}
        if len(sizes) > 1:
            raise ValueError(f"nodal values have mismatched dimensions {sorted(sizes)}")
    vals = np.asarray(values, dtype=float)
    if vals.shape[0] != mesh.n + 1:
        raise ValueError(f"expected {mesh.n + 1} nodal values, got {vals.shape[0]}")
    basis = lagrange_basis(mesh, t)
    return np.tensordot(basis, vals, axes=([-1], [0]))


def lebesgue_constant(mesh: Mesh, grid: int = 100_000) -> float:
    """Estimate the Lebesgue constant by maximizing over a uniform grid.

    This is a diagnostic lower bound on the true constant, not a certified
    value; it increases towards the true constant as ``grid`` grows.
    """
    if grid < 1000:
        raise ValueError("grid must have at least 1000 points")
    best = 0.0
    # chunk to bound memory for large n
    for chunk in np.array_split(np.linspace(-1.0, 1.0, grid), max(1, grid // 20_000)):
        best = max(best, float(np.abs(lagrange_basis(mesh, chunk)).sum(axis=-1).max()))
    return best
