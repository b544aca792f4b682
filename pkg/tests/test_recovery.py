import math

import numpy as np
import pytest

from oracles import l1_min_oracle
from qncsim.errors import ConfigError, InfeasibleProblemError
from qncsim.recovery import (METRICS_HEADER, RecoveryProblem, generate_sparse_message,
                             l1_min_decode, load_problem, metrics_record,
                             random_orthonormal_basis, recovery_report, save_problem)


def test_full_sparsity_is_dense_sign_vector():
    sig = generate_sparse_message(12, 12, "rademacher", seed=0)
    assert np.isin(sig.values, (-1.0, 1.0)).all()
    assert sig.support == tuple(range(12))


def test_single_and_zero_sparsity():
    sig = generate_sparse_message(9, 1, "gaussian", seed=1)
    assert np.count_nonzero(sig.values) == 1
    zero = generate_sparse_message(9, 0, seed=2)
    assert not zero.values.any()
    assert zero.support == ()


def test_sparse_message_validation_and_determinism():
    with pytest.raises(ConfigError):
        generate_sparse_message(5, 6)
    with pytest.raises(ConfigError):
        generate_sparse_message(5, 2, law="cauchy")
    a = generate_sparse_message(20, 5, seed=3)
    b = generate_sparse_message(20, 5, seed=3)
    assert np.array_equal(a.values, b.values)


def test_support_is_uniform():
    n, k, draws = 20, 5, 10_000
    counts = np.zeros(n)
    for seed in range(draws):
        sig = generate_sparse_message(n, k, seed=seed)
        counts[list(sig.support)] += 1
    freq = counts / draws
    se = math.sqrt(0.25 * 0.75 / draws)
    assert (np.abs(freq - k / n) <= 4 * se).all()


def test_orthonormal_basis_properties():
    basis = random_orthonormal_basis(15, seed=4)
    assert np.abs(basis.T @ basis - np.eye(15)).max() <= 1e-10
    assert abs(abs(np.linalg.det(basis)) - 1.0) <= 1e-8
    assert np.array_equal(random_orthonormal_basis(15, seed=4), basis)
    assert np.array_equal(random_orthonormal_basis(6, kind="identity"), np.eye(6))
    with pytest.raises(ConfigError):
        random_orthonormal_basis(5, kind="fourier")


def test_decode_zero_measurements():
    theta = np.random.default_rng(0).standard_normal((6, 10))
    estimate = l1_min_decode(RecoveryProblem(np.zeros(6), theta, 0.0))
    assert not estimate.any()


def test_decode_orthonormal_square_is_transpose_solve():
    basis = random_orthonormal_basis(14, seed=5)
    z = np.random.default_rng(6).standard_normal(14)
    estimate = l1_min_decode(RecoveryProblem(z, basis, 0.0), tol=1e-9)
    assert np.linalg.norm(estimate - basis.T @ z) <= 1e-8


def test_decode_standard_gaussian_fixture_exactly():
    rng = np.random.default_rng(2024)
    theta = rng.standard_normal((64, 256)) / math.sqrt(64)
    truth = generate_sparse_message(256, 8, "rademacher", seed=11).values
    problem = RecoveryProblem(theta @ truth, theta, 0.0, truth=truth)
    estimate = l1_min_decode(problem, tol=1e-8)
    assert np.linalg.norm(estimate - truth) <= 1e-6
    found = set(np.flatnonzero(np.abs(estimate) > 0.5))
    assert found == set(np.flatnonzero(truth))


def test_decode_feasibility_and_oracle_objective():
    rng = np.random.default_rng(7)
    for trial in range(8):
        m = int(rng.integers(8, 30))
        n = int(rng.integers(m + 1, 41))
        theta = rng.standard_normal((m, n))
        truth = np.zeros(n)
        sup = rng.choice(n, 3, replace=False)
        truth[sup] = rng.standard_normal(3)
        radius = 0.0 if trial % 2 == 0 else float(rng.uniform(0.05, 0.3))
        z = theta @ truth
        estimate = l1_min_decode(RecoveryProblem(z, theta, radius), tol=1e-9)
        assert np.linalg.norm(theta @ estimate - z) <= radius + 1e-8
        ref = l1_min_oracle(theta, z, radius)
        mine = float(np.abs(estimate).sum())
        assert abs(mine - ref) <= 1e-6 * (1.0 + ref)


def test_decode_noise_monotonicity():
    rng = np.random.default_rng(8)
    theta = rng.standard_normal((12, 24))
    z = rng.standard_normal(12)
    objectives = []
    for radius in (0.05, 0.1, 0.2, 0.4, 0.8):
        estimate = l1_min_decode(RecoveryProblem(z, theta, radius), tol=1e-9)
        objectives.append(np.abs(estimate).sum())
    assert all(a >= b - 1e-7 for a, b in zip(objectives, objectives[1:]))


def test_decode_infeasible_and_invalid():
    theta = np.zeros((3, 4))
    theta[0, 0] = 1.0
    z = np.array([0.0, 2.0, 0.0])
    with pytest.raises(InfeasibleProblemError):
        l1_min_decode(RecoveryProblem(z, theta, 0.5))
    with pytest.raises(ConfigError):
        l1_min_decode(RecoveryProblem(np.zeros(3), np.zeros((3, 4)), 0.0))
    with pytest.raises(ConfigError):
        RecoveryProblem(np.zeros(3), theta, -1.0)


def test_report_exact_recovery_sentinel():
    truth = np.array([0.0, 1.5, 0.0, -2.0])
    metrics = recovery_report(truth.copy(), truth)
    assert metrics.coefficient_error == 0.0
    assert metrics.sdr_db == math.inf
    assert metrics.support_precision == 1.0 and metrics.support_recall == 1.0


def test_report_zero_estimate():
    truth = np.array([0.0, 3.0, -4.0])
    metrics = recovery_report(np.zeros(3), truth)
    assert metrics.coefficient_error == pytest.approx(5.0)
    assert metrics.sdr_db == pytest.approx(0.0)
    assert metrics.support_recall == 0.0


def test_report_isometry_of_scores():
    rng = np.random.default_rng(9)
    basis = random_orthonormal_basis(10, seed=10)
    truth = rng.standard_normal(10)
    estimate = truth + 0.1 * rng.standard_normal(10)
    metrics = recovery_report(estimate, truth, basis)
    assert abs(metrics.coefficient_error - metrics.message_error) <= 1e-10


def test_metrics_record_format():
    truth = np.array([1.0, 0.0])
    line = metrics_record(recovery_report(np.array([0.5, 0.0]), truth))
    assert len(line.split(",")) == len(METRICS_HEADER.split(","))


def test_problem_round_trip(tmp_path):
    rng = np.random.default_rng(12)
    theta = rng.standard_normal((5, 9))
    truth = generate_sparse_message(9, 2, seed=13).values
    problem = RecoveryProblem(theta @ truth, theta, 0.125, truth=truth)
    path = tmp_path / "problem.txt"
    save_problem(problem, str(path))
    back = load_problem(str(path))
    assert np.array_equal(back.measurements, problem.measurements)
    assert np.array_equal(back.sensing, problem.sensing)
    assert back.noise_radius == problem.noise_radius
    assert np.array_equal(back.truth, problem.truth)
    # truth is optional
    save_problem(RecoveryProblem(theta @ truth, theta, 0.0), str(path))
    assert load_problem(str(path)).truth is None
