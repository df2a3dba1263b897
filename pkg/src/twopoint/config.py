"""Run configuration: YAML schema, validation and problem construction.

Schema (keys not listed are rejected)::

    problem:
      kind: builtin-heat | diagonal-custom | dense-custom
      # diagonal-custom
      modes: 2
      eigenvalue: "m^2*pi^2 + 1 + t"      # variables m, t
      forcing: "0"                         # one expression in (m, t) or a list of `modes` in t
      phi: "1/m"                           # one expression in m or a list
      exact: ...                           # optional, like forcing
      # dense-custom
      dim: 2
      matrix: [["2 + t", "0.5"], ["0.5", "3"]]   # entries in t
      symmetric: true
      forcing: ["1", "0"]                  # list of `dim` expressions in t
      phi: ["1", "0"]
      exact: [...]                         # optional
      # custom kinds
      alpha: 0.5
      forcing_smooth: true                 # false: merely continuous forcing
    solver:
      n: [4, 8]                            # or a single integer
      method: fixed-point                  # or direct
      tol: 1.0e-13
      max_iter: 200
      quad_order: null                     # default max(2n + 16, 32)
    output:
      path: results.csv                    # optional
      x: [0.5]                             # sine-series evaluation points (diagonal)
      component: 0                         # reported component (dense)

``builtin-heat`` takes no further problem keys: the family, forcing, datum,
``alpha = 0.5`` and the exact solution are fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from .expr import ExprError, evaluate, parse_expr, variables
from .operators import DenseFamily, DiagonalFamily, NonlocalProblem
from .problems import HEAT_ALPHA, heat_problem

__all__ = ["ConfigError", "RunSpec", "parse_config", "load_config", "build_problem"]

KINDS = ("builtin-heat", "diagonal-custom", "dense-custom")
METHODS = ("fixed-point", "direct")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


@dataclass
class RunSpec:
    kind: str
    alpha: float = HEAT_ALPHA
    modes: Optional[int] = None
    dim: Optional[int] = None
    eigenvalue: Optional[str] = None
    matrix: Optional[list] = None
    symmetric: bool = False
    forcing: object = None
    phi: object = None
    exact: object = None
    forcing_smooth: bool = True
    n: list = field(default_factory=lambda: [4, 6, 8, 12, 16])
    method: str = "fixed-point"
    tol: float = 1e-13
    max_iter: int = 200
    quad_order: Optional[int] = None
    output: Optional[str] = None
    x: list = field(default_factory=lambda: [0.5])
    component: int = 0

    @property
    def state_dim(self) -> int:
        return 1 if self.kind == "builtin-heat" else (self.modes if self.kind == "diagonal-custom" else self.dim)


def _real(value, key):
    if isinstance(value, bool):
        raise ConfigError(key, f"expected a real number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(key, f"expected a real number, got {value!r}")


def _int(value, key, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {value}")
    return value


def _bool(value, key):
    if not isinstance(value, bool):
        raise ConfigError(key, f"expected true or false, got {value!r}")
    return value


def _mapping(value, key):
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(key, f"expected a mapping, got {type(value).__name__}")
    return value


def _reject_unknown(section, allowed, prefix):
    for k in section:
        if k not in allowed:
            raise ConfigError(f"{prefix}.{k}" if prefix else str(k), "unknown key")


def _expr(text, key, allowed_vars):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str):
        raise ConfigError(key, f"expected an expression string, got {text!r}")
    try:
        tree = parse_expr(text)
    except ExprError as exc:
        raise ConfigError(key, str(exc)) from None
    extra = variables(tree) - set(allowed_vars)
    if extra:
        raise ConfigError(key, f"variable(s) {sorted(extra)} not available here (allowed: {', '.join(allowed_vars)})")
    return text


def _expr_list(value, key, count, allowed_vars, scalar_vars=None):
    """A list of ``count`` expressions, or (if ``scalar_vars``) one shared expression."""
    if isinstance(value, list):
        if len(value) != count:
            raise ConfigError(key, f"expected {count} expressions, got {len(value)}")
        return [_expr(v, f"{key}[{i}]", allowed_vars) for i, v in enumerate(value)]
    if scalar_vars is None:
        raise ConfigError(key, f"expected a list of {count} expressions")
    return _expr(value, key, scalar_vars)


def parse_config(text: str) -> RunSpec:
    """Parse and validate a YAML run configuration."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"malformed YAML: {exc}") from None
    doc = _mapping(doc, "<root>")
    _reject_unknown(doc, ("problem", "solver", "output"), "")
    if "problem" not in doc:
        raise ConfigError("problem", "missing required key")
    prob = _mapping(doc["problem"], "problem")
    if "kind" not in prob:
        raise ConfigError("problem.kind", "missing required key")
    kind = prob["kind"]
    if kind not in KINDS:
        raise ConfigError("problem.kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")
    spec = RunSpec(kind=kind)

    def need(key):
        if key not in prob:
            raise ConfigError(f"problem.{key}", "missing required key")
        return prob[key]

    if kind == "builtin-heat":
        _reject_unknown(prob, ("kind",), "problem")
        spec.modes = 1
    else:
        common = ("kind", "alpha", "forcing", "phi", "exact", "forcing_smooth")
        spec.alpha = _real(need("alpha"), "problem.alpha")
        if "forcing_smooth" in prob:
            spec.forcing_smooth = _bool(prob["forcing_smooth"], "problem.forcing_smooth")
        if kind == "diagonal-custom":
            _reject_unknown(prob, common + ("modes", "eigenvalue"), "problem")
            spec.modes = _int(need("modes"), "problem.modes", 1)
            spec.eigenvalue = _expr(need("eigenvalue"), "problem.eigenvalue", ("m", "t"))
            spec.forcing = _expr_list(need("forcing"), "problem.forcing", spec.modes, ("t",), ("m", "t"))
            spec.phi = _expr_list(need("phi"), "problem.phi", spec.modes, (), ("m",))
            if prob.get("exact") is not None:
                spec.exact = _expr_list(prob["exact"], "problem.exact", spec.modes, ("t",), ("m", "t"))
        else:
            _reject_unknown(prob, common + ("dim", "matrix", "symmetric"), "problem")
            spec.dim = _int(need("dim"), "problem.dim", 1)
            rows = need("matrix")
            if not isinstance(rows, list) or len(rows) != spec.dim:
                raise ConfigError("problem.matrix", f"expected {spec.dim} rows")
            spec.matrix = [
                _expr_list(row, f"problem.matrix[{i}]", spec.dim, ("t",)) for i, row in enumerate(rows)
            ]
            if "symmetric" in prob:
                spec.symmetric = _bool(prob["symmetric"], "problem.symmetric")
            spec.forcing = _expr_list(need("forcing"), "problem.forcing", spec.dim, ("t",))
            spec.phi = _expr_list(need("phi"), "problem.phi", spec.dim, ())
            if prob.get("exact") is not None:
                spec.exact = _expr_list(prob["exact"], "problem.exact", spec.dim, ("t",))

    solver = _mapping(doc.get("solver"), "solver")
    _reject_unknown(solver, ("n", "method", "tol", "max_iter", "quad_order"), "solver")
    if "n" in solver:
        ns = solver["n"] if isinstance(solver["n"], list) else [solver["n"]]
        if not ns:
            raise ConfigError("solver.n", "needs at least one degree")
        spec.n = [_int(v, f"solver.n[{i}]", 2) for i, v in enumerate(ns)]
    if "method" in solver:
        if solver["method"] not in METHODS:
            raise ConfigError("solver.method", f"expected one of {', '.join(METHODS)}, got {solver['method']!r}")
        spec.method = solver["method"]
    if "tol" in solver:
        spec.tol = _real(solver["tol"], "solver.tol")
        if not spec.tol > 0:
            raise ConfigError("solver.tol", "must be positive")
    if "max_iter" in solver:
        spec.max_iter = _int(solver["max_iter"], "solver.max_iter", 1)
    if solver.get("quad_order") is not None:
        spec.quad_order = _int(solver["quad_order"], "solver.quad_order", 4)
        if spec.quad_order < max(spec.n) + 2:
            raise ConfigError("solver.quad_order", f"must be at least max(n) + 2 = {max(spec.n) + 2}")

    out = _mapping(doc.get("output"), "output")
    _reject_unknown(out, ("path", "x", "component"), "output")
    if out.get("path") is not None:
        if not isinstance(out["path"], str):
            raise ConfigError("output.path", "expected a file path")
        spec.output = out["path"]
    if "x" in out:
        xs = out["x"] if isinstance(out["x"], list) else [out["x"]]
        spec.x = [_real(v, f"output.x[{i}]") for i, v in enumerate(xs)]
    if "component" in out:
        spec.component = _int(out["component"], "output.component", 0)
        if spec.kind == "dense-custom" and spec.component >= spec.dim:
            raise ConfigError("output.component", f"must be < dim = {spec.dim}")
    return spec


def load_config(path) -> RunSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("", f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _state_fn(exprs, count, per_mode):
    """Vector-valued function of t from one shared (m, t) expression or a list."""
    if isinstance(exprs, str):
        tree = parse_expr(exprs)
        m = np.arange(1, count + 1, dtype=float)

        def fn(t):
            t = np.asarray(t, dtype=float)
            mm = m.reshape((-1,) + (1,) * t.ndim)
            return np.broadcast_to(evaluate(tree, m=mm, t=t), (count,) + t.shape).copy()

        return fn
    trees = [parse_expr(e) for e in exprs]

    def fn(t):
        t = np.asarray(t, dtype=float)
        out = np.empty((count,) + t.shape)
        for i, tree in enumerate(trees):
            env = {"t": t, "m": float(i + 1)} if per_mode else {"t": t}
            out[i] = evaluate(tree, **env)
        return out

    return fn


def build_problem(spec: RunSpec) -> NonlocalProblem:
    """Construct the problem described by ``spec``."""
    if spec.kind == "builtin-heat":
        return heat_problem()
    per_mode = spec.kind == "diagonal-custom"
    count = spec.state_dim
    try:
        if per_mode:
            eig = parse_expr(spec.eigenvalue)
            family = DiagonalFamily(count, lambda m, t: evaluate(eig, m=m, t=t))
            if isinstance(spec.phi, str):
                phi = evaluate(parse_expr(spec.phi), m=np.arange(1, count + 1))
            else:
                phi = np.array([float(evaluate(parse_expr(p), m=i + 1)) for i, p in enumerate(spec.phi)])
        else:
            trees = [[parse_expr(e) for e in row] for row in spec.matrix]
            family = DenseFamily(
                count,
                lambda t: np.array([[float(evaluate(e, t=t)) for e in row] for row in trees]),
                symmetric=spec.symmetric,
            )
            phi = np.array([float(evaluate(parse_expr(p))) for p in spec.phi])
        forcing = _state_fn(spec.forcing, count, per_mode)
        exact = _state_fn(spec.exact, count, per_mode) if spec.exact is not None else None
        return NonlocalProblem(family=family, forcing=forcing, alpha=spec.alpha, phi=np.broadcast_to(phi, (count,)),
                               exact=exact, smooth_forcing=spec.forcing_smooth)
    except ExprError as exc:
        raise ConfigError("problem", f"expression evaluation failed: {exc}") from None
