import math

import numpy as np
import pytest
from scipy.stats import chi2

from qncsim.errors import ConfigError
from qncsim.tail import (_weighted_cdf, gaussian_tail, monte_carlo_tail,
                         weighted_chisq_tail)


def chi2_tail_oracle(dof: int, scale: float, eps: float) -> float:
    """Closed-form tail of scale*chi2(dof) around 1."""
    hi = chi2.cdf((1 + eps) / scale, dof)
    lo = chi2.cdf(max(1 - eps, 0.0) / scale, dof)
    return 1.0 - (hi - lo)


def test_single_weight_anchor():
    p = weighted_chisq_tail([1.0], 0.5)
    assert p == pytest.approx(0.74117, abs=1e-5)
    assert p == pytest.approx(chi2_tail_oracle(1, 1.0, 0.5), abs=1e-9)


def test_two_equal_weights_anchor():
    p = weighted_chisq_tail([0.5, 0.5], 0.5)
    assert p == pytest.approx(0.61660, abs=1e-5)
    assert p == pytest.approx(1.0 - (math.exp(-0.5) - math.exp(-1.5)), abs=1e-9)


@pytest.mark.parametrize("dof", [1, 2, 3, 5, 8])
def test_cdf_matches_chi_square(dof):
    lam = np.full(dof, 1.0)
    for x in (0.25, 1.0, 2.5, dof + 3.0):
        mine = _weighted_cdf(x, lam, np.ones(dof), 1e-9)
        assert mine == pytest.approx(chi2.cdf(x, dof), abs=1e-9)


def test_gaussian_matches_expanded_weights():
    for m in (1, 2, 5, 10, 50, 100):
        for eps in (0.1, 0.29289, 0.7):
            direct = gaussian_tail(m, eps)
            expanded = weighted_chisq_tail(np.full(m, 1.0 / m), eps)
            assert direct == pytest.approx(expanded, abs=1e-8)


def test_gaussian_against_incomplete_gamma_oracle():
    for m in (2, 10, 100):
        for eps in (0.29289, 0.5):
            assert gaussian_tail(m, eps) == pytest.approx(
                chi2_tail_oracle(m, 1.0 / m, eps), abs=1e-8
            )


def test_monotone_in_epsilon():
    lam = np.array([0.45, 0.3, 0.15, 0.1])
    values = [weighted_chisq_tail(lam, e) for e in np.linspace(0.02, 2.5, 60)]
    assert all(a >= b - 1e-8 for a, b in zip(values, values[1:]))


def test_large_epsilon_is_one_sided():
    lam = np.array([0.5, 0.3, 0.2])
    p = weighted_chisq_tail(lam, 10.0)
    assert p <= weighted_chisq_tail(lam, 9.0)
    assert p == pytest.approx(1.0 - _weighted_cdf(11.0, lam, np.ones(3), 1e-9), abs=1e-9)
    assert p < 1e-3


def test_permutation_and_zero_padding_invariance():
    rng = np.random.default_rng(3)
    lam = rng.exponential(1.0, 9)
    lam /= lam.sum()
    base = weighted_chisq_tail(lam, 0.3)
    assert weighted_chisq_tail(lam[::-1], 0.3) == pytest.approx(base, abs=1e-12)
    padded = np.concatenate([lam, np.zeros(5)])
    assert weighted_chisq_tail(padded, 0.3) == pytest.approx(base, abs=1e-12)


def test_monte_carlo_consistency_random_spectra():
    # 20 random spectra at 1e6 samples each; the integral must sit
    # within 4 standard errors of the sampled frequency
    rng = np.random.default_rng(11)
    for trial in range(20):
        size = int(rng.integers(2, 41))
        lam = rng.exponential(1.0, size)
        lam /= lam.sum()
        eps = float(rng.uniform(0.1, 0.8))
        exact = weighted_chisq_tail(lam, eps)
        est, se = monte_carlo_tail(lam, eps, 10**6, seed=trial)
        assert abs(exact - est) <= 4 * max(se, 1e-6)


def test_monte_carlo_hits_closed_form_anchor():
    est, se = monte_carlo_tail([1.0], 0.5, 10**6, seed=7)
    assert abs(est - 0.74117) <= 3 * se


def test_degenerate_spectra():
    assert weighted_chisq_tail([0.0, 0.0], 0.5) == 1.0
    assert weighted_chisq_tail([0.0], 1.0) == 1.0
    assert weighted_chisq_tail([0.0, 0.0], 1.5) == 0.0
    est, se = monte_carlo_tail([0.0, 0.0], 0.5, 10_000, seed=0)
    assert est == 1.0 and se == 0.0


def test_result_in_unit_interval():
    assert 0.0 <= weighted_chisq_tail([1e-8], 1e-6) <= 1.0
    assert 0.0 <= weighted_chisq_tail([5.0, 5.0], 0.01) <= 1.0


def test_input_validation():
    with pytest.raises(ConfigError):
        weighted_chisq_tail([], 0.5)
    with pytest.raises(ConfigError):
        weighted_chisq_tail([0.5, -1e-6], 0.5)
    with pytest.raises(ConfigError):
        weighted_chisq_tail([0.5], 0.0)
    with pytest.raises(ConfigError):
        gaussian_tail(0, 0.5)
    with pytest.raises(ConfigError):
        gaussian_tail(2.5, 0.5)
    with pytest.raises(ConfigError):
        monte_carlo_tail([1.0], 0.5, 100, seed=0)
    # tiny clamped negatives are fine
    weighted_chisq_tail([0.5, -1e-12], 0.5)


def test_heavy_spectrum_sizes():
    rng = np.random.default_rng(5)
    lam = rng.exponential(1.0, 1800)
    lam /= lam.sum()
    p = weighted_chisq_tail(lam, 0.29289)
    est, se = monte_carlo_tail(lam, 0.29289, 50_000, seed=1)
    assert abs(p - est) <= 4 * max(se, 1e-6)
