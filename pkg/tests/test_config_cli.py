import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from twopoint.cli import main, run_convergence, run_reproduce_tables, run_solve
from twopoint.config import ConfigError, build_problem, parse_config
from twopoint.problems import HEAT_ALPHA
from twopoint.solver import WellPosednessWarning

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

DIAGONAL = """
problem:
  kind: diagonal-custom
  modes: 2
  eigenvalue: "m + 1 + 0.5*t"
  forcing: "cos(m*t)"
  phi: ["1", "0.5"]
  alpha: 0.3
solver:
  n: [4, 8]
"""


def test_builtin_heat_config():
    spec = parse_config("problem:\n  kind: builtin-heat\nsolver:\n  n: [4]\n")
    assert spec.kind == "builtin-heat" and spec.n == [4] and spec.alpha == HEAT_ALPHA
    prob = build_problem(spec)
    assert prob.alpha == 0.5
    assert prob.phi[0] == pytest.approx(1 + 0.5 * np.exp(-2 * np.pi**2))
    assert prob.family.eigenvalues(0.0)[0] == pytest.approx(np.pi**2 + 1)
    assert prob.exact is not None


def test_builtin_heat_rejects_extra_keys():
    with pytest.raises(ConfigError, match="problem.alpha"):
        parse_config("problem:\n  kind: builtin-heat\n  alpha: 0.3\n")


def test_alpha_type_error():
    with pytest.raises(ConfigError) as info:
        parse_config(DIAGONAL.replace("alpha: 0.3", 'alpha: "abc"'))
    assert info.value.key == "problem.alpha"
    assert "problem.alpha" in str(info.value)


def test_missing_eigenvalue():
    text = "\n".join(l for l in DIAGONAL.splitlines() if "eigenvalue" not in l)
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == "problem.eigenvalue" and "missing" in str(info.value)


@pytest.mark.parametrize(
    "old,new,key",
    [
        ('eigenvalue: "m + 1 + 0.5*t"', 'eigenvalue: "m + * t"', "problem.eigenvalue"),
        ('eigenvalue: "m + 1 + 0.5*t"', 'eigenvalue: "m + x"', "problem.eigenvalue"),
        ('phi: ["1", "0.5"]', 'phi: ["1"]', "problem.phi"),
        ('phi: ["1", "0.5"]', 'phi: ["1", "t"]', "problem.phi[1]"),
        ("modes: 2", "modes: 0", "problem.modes"),
        ("n: [4, 8]", "n: [1]", "solver.n[0]"),
        ("n: [4, 8]", "n: [4]\n  method: cg", "solver.method"),
        ("n: [4, 8]", "n: [4]\n  tol: -1", "solver.tol"),
        ("n: [4, 8]", "n: [4]\n  quad_order: 3", "solver.quad_order"),
        ("n: [4, 8]", "n: [4]\n  colour: red", "solver.colour"),
        ("kind: diagonal-custom", "kind: spectral", "problem.kind"),
    ],
)
def test_config_errors_name_key(old, new, key):
    with pytest.raises(ConfigError) as info:
        parse_config(DIAGONAL.replace(old, new))
    assert info.value.key == key


def test_malformed_yaml():
    with pytest.raises(ConfigError):
        parse_config("problem: [unclosed")
    with pytest.raises(ConfigError):
        parse_config("- just\n- a list\n")
    with pytest.raises(ConfigError, match="problem"):
        parse_config("solver:\n  n: 4\n")


def test_tol_accepts_yaml11_exponent_string():
    assert parse_config(DIAGONAL + "  tol: 1e-12\n").tol == 1e-12


def test_diagonal_problem_built():
    prob = build_problem(parse_config(DIAGONAL))
    np.testing.assert_allclose(prob.family.eigenvalues(1.0), [2.5, 3.5])
    np.testing.assert_allclose(prob.forcing(0.5), [np.cos(0.5), np.cos(1.0)])
    np.testing.assert_allclose(prob.phi, [1.0, 0.5])


def test_dense_config_file():
    spec = parse_config((CONFIGS / "dense.yaml").read_text())
    prob = build_problem(spec)
    np.testing.assert_allclose(prob.family.matrix(1.0), [[4.0, 0.5], [-0.5, 2.0]])
    # manufactured solution: residual of the nonlocal condition
    ex = prob.exact
    np.testing.assert_allclose(ex(-1.0) + prob.alpha * ex(1.0), prob.phi, atol=1e-14)


def test_solve_csv_format_and_determinism():
    spec = parse_config(DIAGONAL)
    a, b = run_solve(spec), run_solve(spec)
    assert a == b
    lines = a.split("\n")
    assert lines[0] == "n,k,t,approx,exact,abs_error"
    assert a.endswith("\n") and "\r" not in a
    assert len(lines) == 1 + 5 + 9 + 1
    fields = lines[1].split(",")
    assert fields[:2] == ["4", "0"]
    assert all("e" in f and len(f.split("e")[0].lstrip("-").replace(".", "")) == 8 for f in fields[2:])


def test_solve_multiple_x_adds_column():
    spec = parse_config(DIAGONAL)
    spec.x = [0.25, 0.5]
    out = run_solve(spec, ns=[4])
    assert out.splitlines()[0] == "n,k,t,x,approx,exact,abs_error"
    assert len(out.splitlines()) == 1 + 2 * 5


def test_solve_dense_against_manufactured_solution():
    spec = parse_config((CONFIGS / "dense.yaml").read_text())
    rows = [l.split(",") for l in run_solve(spec, ns=[12]).splitlines()[1:]]
    assert max(float(r[5]) for r in rows) < 1e-8


def test_reproduce_tables():
    text, code, checks = run_reproduce_tables()
    assert code == 0 and all(ok for _, ok, _ in checks)
    rows = [l.split(",") for l in text.splitlines()[1:]]
    assert len(rows) == 5 + 7 + 9 + 13 + 17
    n4_t0 = next(r for r in rows if r[0] == "4" and r[1] == "2")
    assert float(n4_t0[2]) == 0.0
    assert float(n4_t0[5]) == pytest.approx(0.00063440, rel=0.2)
    n12_t0 = next(r for r in rows if r[0] == "12" and r[1] == "6")
    assert float(n12_t0[5]) == pytest.approx(0.76362937e-6, rel=0.3)
    assert text == run_reproduce_tables()[0]


def test_convergence_heat():
    spec = parse_config((CONFIGS / "heat.yaml").read_text())
    rows = [l.split(",") for l in run_convergence(spec).splitlines()[1:]]
    errs = [float(r[1]) for r in rows]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] / errs[0] < 1e-4


def test_convergence_constant_problem_one_iteration():
    text = """
problem:
  kind: diagonal-custom
  modes: 2
  eigenvalue: "2*m"
  forcing: "1"
  phi: "1"
  alpha: 0.5
solver:
  n: [4, 6, 8]
"""
    out = run_convergence(parse_config(text), include_wallclock=False)
    rows = [l.split(",") for l in out.splitlines()]
    assert rows[0] == ["n", "max_nodal_error", "iterations", "contraction_q"]
    assert [r[2] for r in rows[1:]] == ["1", "1", "1"]
    assert out == run_convergence(parse_config(text), include_wallclock=False)


def test_convergence_dense_without_exact_is_config_error():
    text = (CONFIGS / "dense.yaml").read_text().replace('  exact: ["exp(-t)", "cos(t)"]\n', "")
    with pytest.raises(ConfigError):
        run_convergence(parse_config(text))


def test_main_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(DIAGONAL)
    out = tmp_path / "out.csv"
    assert main(["solve", "--config", str(cfg), "--n", "6", "--out", str(out)]) == 0
    assert out.read_text().startswith("n,k,t,approx,exact,abs_error\n6,0,")
    assert main(["solve", "--config", str(cfg), "--method", "direct", "--tol", "1e-12"]) == 0
    bad = tmp_path / "bad.yaml"
    bad.write_text(DIAGONAL.replace("alpha: 0.3", "alpha: abc"))
    assert main(["solve", "--config", str(bad)]) == 2
    assert "problem.alpha" in capsys.readouterr().err
    assert main(["solve", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert main(["solve", "--config", str(cfg), "--n", "1"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["convergence", "--config", str(cfg), "--n", "4,x"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_main_singular_problem_exit_1(tmp_path):
    cfg = tmp_path / "sing.yaml"
    cfg.write_text(DIAGONAL.replace('eigenvalue: "m + 1 + 0.5*t"', 'eigenvalue: "1"').replace(
        "alpha: 0.3", f"alpha: {-float(np.exp(2.0))!r}"))
    with pytest.warns(WellPosednessWarning):
        assert main(["solve", "--config", str(cfg)]) == 1


def test_main_convergence_and_tables(tmp_path):
    cfg = CONFIGS / "diagonal.yaml"
    out = tmp_path / "conv.csv"
    assert main(["convergence", "--config", str(cfg), "--n", "4,8", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "n,max_nodal_error,iterations,contraction_q,wallclock"
    tables = tmp_path / "tables.csv"
    assert main(["reproduce-tables", "--out", str(tables)]) == 0
    assert len(tables.read_text().splitlines()) == 52


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "twopoint", "reproduce-tables"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("n,k,t,approx,exact,abs_error\n")
    assert "PASS" in proc.stderr and "FAIL" not in proc.stderr
