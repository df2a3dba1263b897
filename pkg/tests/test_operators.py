import numpy as np
import pytest
import scipy.linalg

from twopoint.operators import (
    DenseFamily,
    DiagonalFamily,
    NonlocalProblem,
    OperatorEvaluationError,
    StrongPositivityError,
    eval_operator,
    exp_action,
    omega_lower_bound,
    wellposedness_margin,
)
from twopoint.problems import constant_family, heat_family, heat_problem


def random_spd(rng, d=5):
    q = rng.normal(size=(d, d))
    return q @ q.T + 0.5 * np.eye(d)


def test_heat_eigenvalue():
    assert eval_operator(heat_family(), 0.0)[0] == pytest.approx(10.869604, abs=1e-6)


def test_constant_eigenvalue():
    fam = constant_family(2.0)
    assert eval_operator(fam, -0.3)[0] == 2.0


def test_dense_constant():
    fam = DenseFamily(2, lambda t: np.diag([1.0, 3.0]))
    for t in (-1.0, 1.0):
        np.testing.assert_array_equal(eval_operator(fam, t), np.diag([1.0, 3.0]))


def test_nonfinite_operator():
    fam = DenseFamily(1, lambda t: [[np.nan]])
    with pytest.raises(OperatorEvaluationError):
        eval_operator(fam, 0.0)


def test_scalar_only_eigenvalue_callable():
    import math

    fam = DiagonalFamily(2, lambda m, t: math.exp(t) + m)
    np.testing.assert_allclose(fam.eigenvalues(0.0), [2.0, 3.0])
    assert fam.eigenvalues(np.zeros(4)).shape == (2, 4)


def test_exp_action_identity():
    v = np.array([1.0, -2.0])
    np.testing.assert_array_equal(exp_action(constant_family([1.0, 4.0]), 0.0, 0.0, v), v)


def test_exp_action_scalar():
    assert exp_action(constant_family(2.0), 0.0, 0.5, [1.0])[0] == pytest.approx(0.36787944, abs=1e-8)


@pytest.mark.parametrize("symmetric", [True, False])
def test_exp_action_dense_diagonal(symmetric):
    fam = DenseFamily(2, lambda t: np.diag([1.0, 3.0]), symmetric=symmetric)
    np.testing.assert_allclose(exp_action(fam, 0.0, 1.0, [1.0, 1.0]), [np.exp(-1), np.exp(-3)], rtol=1e-14)


def test_exp_action_negative_time():
    with pytest.raises(ValueError):
        exp_action(heat_family(), 0.0, -0.1, [1.0])


def _families(rng):
    a = random_spd(rng, 4)
    b = rng.normal(size=(4, 4)) * 0.1
    return [
        heat_family(3),
        DiagonalFamily(3, lambda m, t: 1.0 + m + 0.5 * t),
        DenseFamily(4, lambda t: a + 0.3 * t * np.eye(4), symmetric=True),
        DenseFamily(4, lambda t: a + 0.3 * t * np.eye(4) + b, symmetric=False),
    ]


@pytest.mark.parametrize("idx", range(4))
def test_semigroup(idx):
    rng = np.random.default_rng(idx)
    fam = _families(rng)[idx]
    for _ in range(10):
        t, s1, s2 = rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(0, 2)
        v = rng.normal(size=fam.dim)
        lhs = exp_action(fam, t, s1, exp_action(fam, t, s2, v))
        np.testing.assert_allclose(lhs, exp_action(fam, t, s1 + s2, v), atol=1e-10)


@pytest.mark.parametrize("idx", range(4))
def test_decay_bound(idx):
    rng = np.random.default_rng(10 + idx)
    fam = _families(rng)[idx]
    omega = omega_lower_bound(fam)
    for _ in range(20):
        t, s = rng.uniform(-1, 1), rng.uniform(0, 2)
        v = rng.normal(size=fam.dim)
        assert np.linalg.norm(exp_action(fam, t, s, v)) <= np.exp(-omega * s) * np.linalg.norm(v) * (1 + 1e-10)


def test_symmetric_and_pade_paths_agree():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = random_spd(rng, 5)
        sym = DenseFamily(5, lambda t: a, symmetric=True)
        gen = DenseFamily(5, lambda t: a, symmetric=False)
        s = rng.uniform(0, 1)
        v = rng.normal(size=5)
        np.testing.assert_allclose(exp_action(sym, 0.0, s, v), exp_action(gen, 0.0, s, v), atol=1e-11)
        np.testing.assert_allclose(exp_action(gen, 0.0, s, v), scipy.linalg.expm(-s * a) @ v, atol=1e-12)


def test_omega_heat():
    # lambda(1, t) = pi^2 + 1 + t is minimal at t = -1
    fam = heat_family(4)
    assert omega_lower_bound(fam) == pytest.approx(np.pi**2, abs=1e-12)
    assert fam.omega == pytest.approx(np.pi**2, abs=1e-12)


def test_omega_constant():
    assert omega_lower_bound(constant_family(2.0)) == 2.0


def test_omega_sign_change():
    with pytest.raises(StrongPositivityError):
        omega_lower_bound(DiagonalFamily(1, lambda m, t: t))


def test_omega_sample_count():
    with pytest.raises(ValueError):
        omega_lower_bound(heat_family(), t_samples=8)


def test_margin_alpha_zero():
    assert wellposedness_margin(heat_problem(alpha=0.0)) == 1.0


def test_margin_heat():
    m = wellposedness_margin(heat_problem())
    assert 1.0 - m == pytest.approx(0.5 * np.exp(-2 * np.pi**2), rel=1e-10)
    assert 1.0 - m == pytest.approx(1.3376e-9, rel=1e-3)


def test_margin_boundary():
    prob = NonlocalProblem(constant_family(1e-9), lambda t: np.zeros(1), alpha=-1.0, phi=[1.0])
    assert 0 < wellposedness_margin(prob) < 1e-8


def test_problem_dimension_checks():
    with pytest.raises(ValueError):
        NonlocalProblem(heat_family(2), lambda t: np.zeros(2), 0.5, phi=[1.0])
    with pytest.raises(ValueError):
        NonlocalProblem(heat_family(2), lambda t: np.zeros(3), 0.5, phi=[1.0, 0.0])
