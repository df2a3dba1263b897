"""Command-line entry point.

Subcommands::

    twopoint solve --config run.yaml [--n 8] [--method direct] [--tol 1e-13] [--out out.csv]
    twopoint reproduce-tables [--out tables.csv]
    twopoint convergence --config run.yaml --n 4,6,8,12,16

Exit codes: 0 success, 1 solver or acceptance failure, 2 usage or
configuration error. Diagnostics go to stderr as plain text.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import warnings

import numpy as np

from .benchmarks import ANTISYMMETRY_RTOL, HEAT_TOLERANCES, reference_error_at_zero
from .config import ConfigError, RunSpec, build_problem, load_config
from .oracles import nonlocal_oracle
from .operators import sample_forcing
from .problems import HEAT_ALPHA, heat_problem
from .solver import ConvergenceError, solve_nonlocal

__all__ = ["main", "run_solve", "run_reproduce_tables", "run_convergence", "TABLE_DEGREES"]

logger = logging.getLogger("twopoint")

TABLE_DEGREES = (4, 6, 8, 12, 16)
CSV_HEADER = ["n", "k", "t", "approx", "exact", "abs_error"]


def _fmt(v) -> str:
    return f"{float(v):.7e}"


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def _field_values(spec: RunSpec, states, x):
    """Scalar value reported per node: sine-series field at ``x`` or one component."""
    states = np.atleast_2d(states)
    if spec.kind == "dense-custom":
        return states[:, spec.component]
    m = np.arange(1, states.shape[1] + 1)
    return states @ np.sin(m * np.pi * x)


def _reference_states(spec, problem, nodes):
    if problem.exact is not None:
        return sample_forcing(problem.exact, nodes, problem.dim)
    if problem.family.diagonal:
        return nonlocal_oracle(problem, times=nodes).values
    return None


def run_solve(spec: RunSpec, ns=None, method=None, tol=None) -> str:
    """Solve for every degree and return the nodal CSV."""
    problem = build_problem(spec)
    ns = ns or spec.n
    buf = io.StringIO()
    w = _writer(buf)
    multi_x = len(spec.x) > 1 and spec.kind != "dense-custom"
    w.writerow(CSV_HEADER[:3] + (["x"] if multi_x else []) + CSV_HEADER[3:])
    for n in ns:
        rep = solve_nonlocal(problem, n, method=method or spec.method, tol=tol or spec.tol,
                             max_iter=spec.max_iter, quad_order=spec.quad_order)
        ref = _reference_states(spec, problem, rep.mesh.nodes)
        for x in spec.x if multi_x else spec.x[:1]:
            approx = _field_values(spec, rep.nodal_values, x)
            exact = _field_values(spec, ref, x) if ref is not None else np.full_like(approx, np.nan)
            for k, t in enumerate(rep.mesh.nodes):
                row = [n, k, _fmt(t)] + ([_fmt(x)] if multi_x else [])
                w.writerow(row + [_fmt(approx[k]), _fmt(exact[k]), _fmt(abs(approx[k] - exact[k]))])
    return buf.getvalue()


def run_reproduce_tables(degrees=TABLE_DEGREES):
    """Heat benchmark error tables at x = 0.5.

    Returns ``(csv_text, exit_code, checks)`` where ``checks`` is a list of
    ``(name, passed, detail)``; the exit code is 1 if any check failed.
    """
    problem = heat_problem()
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(CSV_HEADER)
    checks = []
    for n in degrees:
        rep = solve_nonlocal(problem, n)
        nodes = rep.mesh.nodes
        approx = rep.nodal_values[:, 0]
        exact = problem.exact(nodes)[0]
        err = np.abs(approx - exact)
        for k, t in enumerate(nodes):
            w.writerow([n, k, _fmt(t), _fmt(approx[k]), _fmt(exact[k]), _fmt(err[k])])
        if n in HEAT_TOLERANCES:
            ref = reference_error_at_zero(n)
            got = err[np.argmin(np.abs(nodes))]
            rel = abs(got - ref) / ref
            checks.append((f"n={n} error at t=0", rel <= HEAT_TOLERANCES[n],
                           f"{got:.8e} vs {ref:.8e} (rel. dev. {rel:.2%}, tol {HEAT_TOLERANCES[n]:.0%})"))
        ratio = err[0] / (HEAT_ALPHA * err[-1])
        checks.append((f"n={n} error(-1) = alpha*error(1)", abs(ratio - 1) <= ANTISYMMETRY_RTOL,
                       f"ratio {ratio:.6f}"))
    code = 0 if all(ok for _, ok, _ in checks) else 1
    return buf.getvalue(), code, checks


def run_convergence(spec: RunSpec, ns=None, include_wallclock=True) -> str:
    """One row per degree: max nodal error, iterations, contraction and timing."""
    problem = build_problem(spec)
    if problem.exact is None and not problem.family.diagonal:
        raise ConfigError("problem.exact", "dense problems need an exact solution for convergence runs")
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["n", "max_nodal_error", "iterations", "contraction_q"] + (["wallclock"] if include_wallclock else []))
    for n in ns or spec.n:
        rep = solve_nonlocal(problem, n, method=spec.method, tol=spec.tol, max_iter=spec.max_iter,
                             quad_order=spec.quad_order)
        if rep.errors_at_nodes is not None:
            err = rep.max_error
        else:
            ref = nonlocal_oracle(problem, times=rep.mesh.nodes).values
            err = float(np.linalg.norm(rep.nodal_values - ref, axis=1).max())
        row = [n, _fmt(err), rep.iterations, _fmt(rep.contraction_q)]
        w.writerow(row + ([_fmt(rep.wallclock)] if include_wallclock else []))
    return buf.getvalue()


def _degrees(text):
    try:
        ns = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not ns or min(ns) < 2:
        raise argparse.ArgumentTypeError("degrees must be integers >= 2")
    return ns


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a real number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _build_parser():
    p = argparse.ArgumentParser(prog="twopoint", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a configured problem and write nodal values")
    s.add_argument("--config", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--method", choices=("fixed-point", "direct"))
    s.add_argument("--tol", type=_positive_float)
    s.add_argument("--x", type=lambda v: [float(x) for x in v.split(",")],
                   help="comma-separated x points for the sine-series field")
    s.add_argument("--out")

    r = sub.add_parser("reproduce-tables", help="heat benchmark error tables")
    r.add_argument("--out")

    c = sub.add_parser("convergence", help="error versus degree")
    c.add_argument("--config", required=True)
    c.add_argument("--n", type=_degrees, default=list(TABLE_DEGREES))
    c.add_argument("--no-wallclock", action="store_true", help="omit the timing column")
    c.add_argument("--out")
    return p


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    warnings.simplefilter("default")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "reproduce-tables":
            text, code, checks = run_reproduce_tables()
            _emit(text, args.out)
            for name, ok, detail in checks:
                print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=sys.stderr)
            return code
        spec = load_config(args.config)
        if args.command == "solve":
            if args.n is not None and args.n < 2:
                raise ConfigError("--n", "degree must be >= 2")
            if args.x:
                spec.x = args.x
            text = run_solve(spec, ns=[args.n] if args.n else None, method=args.method, tol=args.tol)
        else:
            text = run_convergence(spec, ns=args.n, include_wallclock=not args.no_wallclock)
        _emit(text, args.out or spec.output)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
