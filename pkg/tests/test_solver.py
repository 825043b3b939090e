import numpy as np
import numpy.testing as npt
import pytest
import scipy.linalg

from tensorsmooth.core.errors import DataError, DimensionError, PreconditionerError
from tensorsmooth.engine.dense import dense_operator, fit_matrices
from tensorsmooth.engine.penalty import build_curvature_penalty, build_difference_penalty, zero_penalty
from tensorsmooth.engine.solver import MatrixFreeOperator, cg_solve, make_fit_operator, solve
from tensorsmooth.engine.tensor_ops import TensorDesign
from tensorsmooth.models.spec import Preconditioner, SolverConfig


def _random_spd(rng, K):
    a = rng.standard_normal((K, K))
    return a @ a.T + K * np.eye(K)


def test_diagonal_system_with_jacobi():
    d = np.array([1.0, 4.0, 0.5, 10.0])
    b = np.array([2.0, -1.0, 3.0, 5.0])
    x, report = cg_solve(dense_operator(np.diag(d)), b)
    npt.assert_allclose(x, b / d, rtol=1e-14)
    assert report.iterations == 1
    assert report.converged


def test_diagonal_system_without_preconditioner():
    d = np.array([1.0, 4.0, 0.5, 10.0])
    b = np.array([2.0, -1.0, 3.0, 5.0])
    x, report = cg_solve(dense_operator(np.diag(d)), b, precond=Preconditioner.NONE)
    npt.assert_allclose(x, b / d, rtol=1e-6)
    assert report.iterations <= 5


def test_identity_one_iteration(rng):
    b = rng.standard_normal(9)
    x, report = cg_solve(dense_operator(np.eye(9)), b, precond="none")
    npt.assert_allclose(x, b, rtol=1e-15)
    assert report.iterations == 1


def test_random_spd_matches_direct_solve(rng):
    a = _random_spd(rng, 30)
    b = rng.standard_normal(30)
    x, report = cg_solve(dense_operator(a), b, rtol=1e-12)
    expected = scipy.linalg.solve(a, b, assume_a="pos")
    assert report.converged
    assert np.linalg.norm(x - expected) <= 1e-8 * np.linalg.norm(expected)


def test_zero_right_hand_side(rng):
    x, report = cg_solve(dense_operator(_random_spd(rng, 6)), np.zeros(6))
    npt.assert_array_equal(x, 0.0)
    assert report.iterations == 0 and report.converged


def test_absolute_tolerance_mode(rng):
    a = _random_spd(rng, 15)
    b = rng.standard_normal(15)
    x, report = cg_solve(dense_operator(a), b, tol=1e-20)
    assert report.final_residual_norm**2 <= 1e-20
    assert np.linalg.norm(a @ x - b) <= 1e-9


def test_iteration_cap_reports_unconverged(rng):
    a = _random_spd(rng, 40) + np.diag(np.linspace(1, 1e4, 40))
    _, report = cg_solve(dense_operator(a), rng.standard_normal(40), max_iter=2, precond="none")
    assert report.iterations == 2
    assert not report.converged
    assert len(report.residual_history) == 3


def test_warm_start(rng):
    a = _random_spd(rng, 10)
    b = rng.standard_normal(10)
    exact = scipy.linalg.solve(a, b)
    x, report = cg_solve(dense_operator(a), b, x0=exact)
    assert report.iterations <= 1
    npt.assert_allclose(x, exact, rtol=1e-8)


def test_missing_diagonal_fails_for_jacobi():
    op = MatrixFreeOperator(3, lambda x: 2 * x)
    with pytest.raises(PreconditionerError):
        cg_solve(op, np.ones(3))
    x, _ = cg_solve(op, np.ones(3), precond="none")
    npt.assert_allclose(x, 0.5)


def test_nonpositive_diagonal_fails():
    with pytest.raises(PreconditionerError):
        cg_solve(dense_operator(np.diag([1.0, 0.0, 2.0])), np.ones(3))


def test_rhs_length_checked():
    with pytest.raises(DimensionError):
        cg_solve(dense_operator(np.eye(3)), np.ones(4))


def test_solve_uses_config(rng):
    a = _random_spd(rng, 12)
    b = rng.standard_normal(12)
    _, report = solve(dense_operator(a), b, SolverConfig(max_iter=1, preconditioner="none"))
    assert report.iterations == 1


def _fit_instances(count, seed, make_bases):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        P = int(rng.integers(1, 3))
        dims = tuple(int(J) for J in rng.integers(4, 7, size=P))
        n = int(rng.integers(40, 80))
        bases = make_bases(dims)
        design = TensorDesign.from_bases(bases, [rng.uniform(0, 1, n) for _ in dims])
        penalty = build_difference_penalty(bases) if rng.uniform() < 0.5 else build_curvature_penalty(bases)
        lam = float(10 ** rng.uniform(-1, 1))
        yield rng, design, penalty, lam, rng.standard_normal(n)


def test_fit_solutions_match_dense(make_bases):
    for _, design, penalty, lam, y in _fit_instances(50, 11, make_bases):
        phi, _, system = fit_matrices(design, penalty, lam)
        expected = scipy.linalg.solve(system, phi.T @ y, assume_a="sym")
        op = make_fit_operator(design, penalty, lam)
        x, report = cg_solve(op, design.phi_t(y), rtol=1e-13)
        assert np.linalg.norm(x - expected) <= 1e-8 * np.linalg.norm(expected)


def test_energy_error_never_increases(make_bases):
    for _, design, penalty, lam, y in _fit_instances(50, 12, make_bases):
        _, _, system = fit_matrices(design, penalty, lam)
        b = design.phi_t(y)
        expected = scipy.linalg.solve(system, b, assume_a="sym")
        errors = [np.dot(expected, system @ expected)]

        def track(x):
            e = x - expected
            errors.append(np.dot(e, system @ e))

        cg_solve(make_fit_operator(design, penalty, lam), b, rtol=1e-12, callback=track)
        errors = np.array(errors)
        assert np.all(np.diff(errors) <= 1e-9 * errors[0])


def test_fit_operator_products(make_spline_design, rng):
    bases, design = make_spline_design((5, 4), 40)
    penalty = build_difference_penalty(bases)
    phi, gram, system = fit_matrices(design, penalty, 0.7)
    alpha = rng.standard_normal(design.K)
    npt.assert_allclose(make_fit_operator(design, penalty, 0.0).matvec(alpha), gram @ alpha, rtol=1e-10, atol=1e-12)
    op = make_fit_operator(design, penalty, 0.7)
    npt.assert_allclose(op.matvec(alpha), system @ alpha, rtol=1e-10, atol=1e-12)
    npt.assert_allclose(op.diagonal(), np.diag(system), rtol=1e-12)


def test_weights_scale_data_part(make_spline_design, rng):
    bases, design = make_spline_design((4, 4), 30)
    penalty = build_difference_penalty(bases)
    alpha = rng.standard_normal(design.K)
    once = make_fit_operator(design, penalty, 0.0, np.ones(30)).matvec(alpha)
    twice = make_fit_operator(design, penalty, 0.0, np.full(30, 2.0)).matvec(alpha)
    npt.assert_allclose(twice, 2 * once, rtol=1e-14)


def test_all_ones_factors_diagonal():
    design = TensorDesign.from_factors([np.ones((7, 2)), np.ones((7, 3))])
    op = make_fit_operator(design, zero_penalty(6), 0.0, np.ones(7))
    npt.assert_array_equal(op.diagonal(), np.full(6, 7.0))


def test_fit_operator_validation(make_spline_design):
    bases, design = make_spline_design((4, 4), 10)
    penalty = build_difference_penalty(bases)
    with pytest.raises(DataError):
        make_fit_operator(design, penalty, 1.0, np.zeros(10))
    with pytest.raises(DimensionError):
        make_fit_operator(design, build_difference_penalty(bases[:1]), 1.0)


def test_jacobi_beats_plain_cg_on_badly_scaled_system(rng):
    K = 80
    q, _ = np.linalg.qr(rng.standard_normal((K, K)))
    scale = np.diag(np.logspace(0.0, 3.5, K))
    a = scale @ (q @ np.diag(np.linspace(1.0, 4.0, K)) @ q.T) @ scale
    assert np.linalg.cond(a) >= 1e6
    b = rng.standard_normal(K)

    _, jacobi = cg_solve(dense_operator(a), b, precond=Preconditioner.JACOBI)
    _, plain = cg_solve(dense_operator(a), b, precond=Preconditioner.NONE)
    assert jacobi.converged
    assert jacobi.iterations <= plain.iterations


# clustered and narrow spectra: rounding does not stretch termination past K + 5
@pytest.mark.parametrize("spectrum", [np.repeat([1.0, 2.0, 5.0], 10), np.linspace(1.0, 2.0, 30)])
def test_finite_termination(spectrum, rng):
    K = spectrum.size
    q, _ = np.linalg.qr(rng.standard_normal((K, K)))
    a = q @ np.diag(spectrum) @ q.T
    b = rng.standard_normal(K)
    x, report = cg_solve(dense_operator(a), b, tol=1e-24, precond=Preconditioner.NONE)
    assert report.converged
    assert report.iterations <= K + 5
    npt.assert_allclose(x, scipy.linalg.solve(a, b, assume_a="pos"), rtol=1e-9, atol=1e-11)
