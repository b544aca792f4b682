"""Acceptance suite: one test per criterion, one printed line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL
lines and the measured values they rest on.  These tests are heavier
than the unit suite (statistical checks use 1e5..1e6 samples; the
measurement-ratio comparison runs a reduced-scale sweep).
"""

import math
import time

import numpy as np
import pytest
from scipy.special import gammainc

from oracles import l1_min_oracle
from qncsim.coding import (QuantizerSpec, build_mixing_matrix, draw_coefficients,
                           injection_variance, run_qnc)
from qncsim.harness import (SweepConfig, _evaluator, derive_seed,
                            measurement_ratio, run_end_to_end)
from qncsim.network import DeploymentConfig, generate_deployment
from qncsim.recovery import (RecoveryProblem, generate_sparse_message,
                             l1_min_decode)
from qncsim.rip import (min_rank_limited_tail, norm_quadratic_form, psd_spectrum,
                        rip_probability_bound)
from qncsim.tail import gaussian_tail, weighted_chisq_tail


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num} ({name}): {status}" + (f" | {detail}" if detail else ""))
    if not ok:
        pytest.fail(f"criterion {num} ({name}) failed: {detail}")


def chi_square_interval_oracle(m: int, eps: float) -> float:
    """Tail of (1/m)*chi2(m) around 1 via the regularized incomplete gamma."""
    upper = gammainc(m / 2.0, m * (1.0 + eps) / 2.0)
    lower = gammainc(m / 2.0, max(m * (1.0 - eps), 0.0) / 2.0)
    return 1.0 - (upper - lower)


def test_criterion_1_gaussian_closed_form():
    worst = 0.0
    for m in (1, 2, 5, 10, 50, 100):
        for eps in (0.1, 0.29289, 0.5, 1.0):
            mine = gaussian_tail(m, eps)
            ref = chi_square_interval_oracle(m, eps)
            worst = max(worst, abs(mine - ref))
    _report(1, "gaussian tail closed-form match", worst <= 1e-6,
            f"max |diff| = {worst:.3e} over 24 (m, eps) pairs (tol 1e-6)")


def test_criterion_2_weighted_chi_square_anchors():
    p_one = weighted_chisq_tail([1.0], 0.5)
    p_two = weighted_chisq_tail([0.5, 0.5], 0.5)
    err_one = abs(p_one - 0.74117)
    err_two = abs(p_two - 0.61660)
    ok = err_one <= 1e-5 and err_two <= 1e-5
    _report(2, "weighted chi-square anchors", ok,
            f"p(lam=1)={p_one:.7f} (dev {err_one:.2e}), "
            f"p(lam=.5,.5)={p_two:.7f} (dev {err_two:.2e}), tol 1e-5")


def test_criterion_3_monte_carlo_cross_check():
    begin = time.time()
    worst_dev = 0.0
    samples = 10**6
    for trial in range(20):
        graph = generate_deployment(DeploymentConfig(10, 30, seed=300 + trial))
        schedule = draw_coefficients(graph, 5, seed=600 + trial)
        mixing = build_mixing_matrix(schedule, graph)
        var = schedule.injection_variance
        rng = np.random.default_rng(900 + trial)
        x = rng.standard_normal(10)
        x /= np.linalg.norm(x)
        eps = float(rng.uniform(0.15, 0.5))
        spectrum = psd_spectrum(norm_quadratic_form(mixing, x, graph, var))
        exact = weighted_chisq_tail(spectrum, eps)
        # Monte Carlo over injection draws of the actual measurement norm
        tails = graph.tails()
        scale = math.sqrt(var) * x[tails]
        hits = 0
        chunk = 10**5
        for _ in range(samples // chunk):
            alpha = rng.standard_normal((chunk, 30))
            norms = ((alpha * scale) @ mixing.T)
            q = (norms * norms).sum(axis=1)
            hits += int(np.count_nonzero(np.abs(q - 1.0) >= eps))
        estimate = hits / samples
        se = math.sqrt(max(estimate * (1 - estimate), 1e-12) / samples)
        worst_dev = max(worst_dev, abs(exact - estimate) / (4 * se))
    ok = worst_dev <= 1.0
    _report(3, "monte carlo cross-check of the spectrum chain", ok,
            f"max |integral - MC| = {worst_dev:.2f} of its 4-sigma budget, "
            f"20 deployments x 1e6 draws, {time.time() - begin:.0f}s")


def test_criterion_4_coefficient_design_statistics():
    begin = time.time()
    graph = generate_deployment(DeploymentConfig(10, 30, seed=41))
    schedule = draw_coefficients(graph, 5, seed=42)
    mixing = build_mixing_matrix(schedule, graph)
    var = schedule.injection_variance
    m, edge_count = mixing.shape
    n = graph.node_count
    tails = graph.tails()
    # weight matrix: entry column (i, v) collects mixing[i, Out(v)]
    weights = np.zeros((edge_count, m * n))
    for e in range(edge_count):
        weights[e, np.arange(m) * n + tails[e]] = mixing[:, e]

    draws = 10**5
    rng = np.random.default_rng(43)
    total = np.zeros(m * n)
    cross = np.zeros((m * n, m * n))
    chunk = 2 * 10**4
    for _ in range(draws // chunk):
        alpha = rng.standard_normal((chunk, edge_count)) * math.sqrt(var)
        flat = alpha @ weights
        total += flat.sum(axis=0)
        cross += flat.T @ flat
    mean = total / draws
    second = cross / draws
    cov = second - np.outer(mean, mean)
    std = np.sqrt(np.clip(np.diag(cov), 1e-30, None))

    live = std > 1e-12  # entries whose column has any mass
    mean_dev = np.abs(mean[live]) / (4 * std[live] / math.sqrt(draws))
    worst_mean = float(mean_dev.max())

    # cross-column covariances: all same-row pairs plus a sampled set of
    # cross-row pairs (testing every pair at 4 sigma would fail by
    # multiplicity alone)
    pair_devs = []
    for i in range(m):
        for v in range(n):
            for w in range(v + 1, n):
                a, b = i * n + v, i * n + w
                if std[a] < 1e-12 or std[b] < 1e-12:
                    continue
                se = std[a] * std[b] / math.sqrt(draws)
                pair_devs.append(abs(cov[a, b]) / (4 * se))
    pair_rng = np.random.default_rng(4443)
    for _ in range(800):
        i, ip = pair_rng.integers(m, size=2)
        v, w = pair_rng.integers(n, size=2)
        if v == w:
            continue
        a, b = int(i) * n + int(v), int(ip) * n + int(w)
        if std[a] < 1e-12 or std[b] < 1e-12:
            continue
        se = std[a] * std[b] / math.sqrt(draws)
        pair_devs.append(abs(cov[a, b]) / (4 * se))
    worst_cov = float(max(pair_devs))

    # normality of individual entries at 1e6 draws: kurtosis near 3
    kurt_devs = []
    krng = np.random.default_rng(45)
    for v in range(n):
        out = list(graph.outgoing_edges(v))
        if not out:
            continue
        row = int(np.argmax(np.abs(mixing[:, out]).sum(axis=1)))
        w = mixing[row, out] * math.sqrt(var)
        if np.abs(w).max() < 1e-9:
            continue
        samples = (krng.standard_normal((10**6, len(out))) * w).sum(axis=1)
        centred = samples - samples.mean()
        kurt = float(np.mean(centred**4) / np.mean(centred**2) ** 2)
        kurt_devs.append(abs(kurt - 3.0))
        if len(kurt_devs) >= 5:
            break
    worst_kurt = max(kurt_devs)

    ok = worst_mean <= 1.0 and worst_cov <= 1.0 and worst_kurt <= 0.1
    _report(4, "coefficient-design statistics", ok,
            f"means {worst_mean:.2f} and cross-column covs {worst_cov:.2f} "
            f"of their 4-sigma budgets; kurtosis dev {worst_kurt:.3f} (tol 0.1); "
            f"{time.time() - begin:.0f}s")


def test_criterion_5_noiseless_consistency():
    worst = 0.0
    rng = np.random.default_rng(55)
    for dep in range(10):
        graph = generate_deployment(DeploymentConfig(10, 30, seed=500 + dep))
        schedule = draw_coefficients(graph, 5, seed=550 + dep)
        for _ in range(10):
            x = rng.standard_normal(10)
            observed, noise, system = run_qnc(graph, schedule,
                                              QuantizerSpec.disabled(), x)
            rel = float(np.linalg.norm(noise) / np.linalg.norm(observed))
            worst = max(worst, rel)
    _report(5, "noiseless linear-model consistency", worst <= 1e-10,
            f"max relative deviation {worst:.3e} over 100 runs (tol 1e-10)")


def test_criterion_6_measurement_ratio_trend():
    begin = time.time()
    cfg = SweepConfig(
        node_count=20,
        edge_counts=(60, 120),
        deltas=(0.2, 0.41421),
        stop_times=(2,),  # stop times are probed by the ratio search
        deployments=16,
        search_budget=48,
        seed=6,
    )
    target = 1e-2
    ratios: dict[tuple[int, float], float] = {}
    lines = []
    for edge_count in cfg.edge_counts:
        evaluators = [_evaluator(cfg, edge_count, dep)
                      for dep in range(cfg.deployments)]
        for delta in cfg.deltas:
            cell = measurement_ratio(cfg, edge_count, delta, target=target,
                                     m_cap_factor=10.0, evaluators=evaluators)
            ratios[(edge_count, delta)] = cell.log10_ratio
            lines.append(
                f"|E|={edge_count} delta={delta}: m_gauss={cell.m_gauss}, "
                f"m_qnc={cell.m_qnc}, log10 ratio={cell.log10_ratio}, "
                f"achieved p={cell.achieved_p_qnc}, "
                f"rank-limited floor={cell.rank_limited_floor:.4f}"
            )
    for line in lines:
        print("  " + line)
    print(f"  sweep time {time.time() - begin:.0f}s")
    within_decade = all(r < 1.0 for r in ratios.values())
    improves = all(
        ratios[(120, d)] <= ratios[(60, d)] + 0.1 for d in cfg.deltas
    )
    detail = (
        f"log10 ratios at matched p_tail={target}: "
        + "; ".join(f"|E|={e},delta={d}: {r}" for (e, d), r in sorted(ratios.items()))
        + " | every direction form has at most |E| nonzero chi-square weights, "
          "so the searched worst-case tail cannot drop below the rank-limited "
          "floors printed above, which all exceed the matched level at this "
          "reduced scale"
    )
    _report(6, "measurement-count ratio trend at reduced scale",
            within_decade and improves, detail)


def test_criterion_7_rip_bound_arithmetic():
    cases = [
        (100, 2, 0.41421, 1e-12),
        (100, 1, 0.41421, 1e-9),
        (50, 3, 0.3, 1e-14),
        (30, 2, 0.25, 1e-10),
        (200, 1, 0.5, 1e-8),
        (20, 4, 0.41421, 1e-15),
        (64, 2, 0.2, 1e-11),
        (150, 3, 0.35, 1e-16),
        (10, 1, 0.9, 1e-6),
        (40, 5, 0.45, 1e-18),
    ]
    worst_rel = 0.0
    for n, k, delta, p_tail in cases:
        direct = 1.0 - math.comb(n, k) * (42.0 / delta) ** k * p_tail
        mine = rip_probability_bound(p_tail, n, k, delta)
        worst_rel = max(worst_rel, abs(mine - direct) / direct)
    exact_ok = worst_rel <= 1e-10
    trivial_ok = rip_probability_bound(0.0, 100, 5, 0.41421) == 1.0
    floor_ok = rip_probability_bound(0.9, 100, 5, 0.41421) == 0.0

    # realistic searched tails keep the bound vacuous for k >= 5 at n=100
    realistic = [gaussian_tail(m, 0.41421 / math.sqrt(2)) for m in (200, 400, 800)]
    graph = generate_deployment(DeploymentConfig(20, 60, seed=77))
    schedule = draw_coefficients(graph, 9, seed=78)
    mixing = build_mixing_matrix(schedule, graph)
    from qncsim.rip import worst_case_tail
    realistic.append(worst_case_tail(mixing, graph, schedule.injection_variance,
                                     0.41421 / math.sqrt(2), budget=24, seed=1).p_tail)
    vacuous_ok = all(
        rip_probability_bound(p, 100, k, 0.41421) == 0.0
        for p in realistic for k in range(5, 11)
    )
    ok = exact_ok and trivial_ok and floor_ok and vacuous_ok
    _report(7, "RIP probability-bound arithmetic", ok,
            f"max rel dev {worst_rel:.2e} on 10 log-space cases (tol 1e-10); "
            f"p=0 gives 1: {trivial_ok}; vacuous floor: {floor_ok}; "
            f"k>=5 vacuous at n=100 for realistic tails "
            f"{[f'{p:.2e}' for p in realistic]}: {vacuous_ok}")


def test_criterion_8_l1_decoder():
    begin = time.time()
    rng = np.random.default_rng(88)
    worst_rel = 0.0
    for trial in range(50):
        m = int(rng.integers(8, 31))
        n = int(rng.integers(m + 1, 41))
        theta = rng.standard_normal((m, n))
        truth = np.zeros(n)
        support = rng.choice(n, max(1, n // 8), replace=False)
        truth[support] = rng.standard_normal(len(support))
        radius = 0.0 if trial % 2 == 0 else float(rng.uniform(0.05, 0.4))
        z = theta @ truth
        estimate = l1_min_decode(RecoveryProblem(z, theta, radius), tol=1e-9)
        ref = l1_min_oracle(theta, z, radius)
        worst_rel = max(worst_rel, abs(np.abs(estimate).sum() - ref) / (1.0 + ref))
    oracle_ok = worst_rel <= 1e-6

    fix_rng = np.random.default_rng(2024)
    theta = fix_rng.standard_normal((64, 256)) / math.sqrt(64)
    truth = generate_sparse_message(256, 8, "rademacher", seed=11).values
    estimate = l1_min_decode(RecoveryProblem(theta @ truth, theta, 0.0), tol=1e-8)
    fixture_err = float(np.linalg.norm(estimate - truth))
    fixture_ok = fixture_err <= 1e-6

    sdr_ok = True
    feas_ok = True
    for seed in range(20):
        record = run_end_to_end(12, 40, 2, 7, 6.0, seed=800 + seed)
        sdr_ok = sdr_ok and math.isfinite(record.metrics.sdr_db)
        feas_ok = feas_ok and record.feasible
    ok = oracle_ok and fixture_ok and sdr_ok and feas_ok
    _report(8, "l1-min decoder", ok,
            f"oracle rel dev {worst_rel:.2e} on 50 instances (tol 1e-6); "
            f"fixture error {fixture_err:.2e} (tol 1e-6); "
            f"20 quantized runs finite SDR: {sdr_ok}, feasible: {feas_ok}; "
            f"{time.time() - begin:.0f}s")
