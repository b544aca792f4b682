"""Direction spectra, worst-case tail search, and RIP probability bounds.

For a unit direction x the squared measurement norm is a quadratic form
in the injection Gaussians; its matrix is the mixing Gram conjugated by
the diagonal of per-edge tail components of x, scaled by the injection
variance.  The eigenvalues of that form weight independent one-degree
chi-squares, which feeds the tail-probability machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ConfigError
from .network import NetworkGraph
from .tail import weighted_chisq_tail

_UNIT_NORM_TOL = 1e-12


def norm_quadratic_form(mixing: np.ndarray, x: np.ndarray, graph: NetworkGraph,
                        alpha_variance: float) -> np.ndarray:
    """Matrix of the quadratic form giving ||measurement_matrix @ x||^2.

    Returns alpha_variance * D (mixing' mixing) D with D the diagonal of
    x at each edge's tail node.  Symmetric positive semidefinite; `x`
    must be unit norm to 1e-12.
    """
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > _UNIT_NORM_TOL:
        raise ConfigError(f"direction norm {np.linalg.norm(x)!r} is not 1")
    d = x[graph.tails()]
    scaled = mixing * d[None, :]
    form = alpha_variance * (scaled.T @ scaled)
    return 0.5 * (form + form.T)


def psd_spectrum(form: np.ndarray, *, negative_tol: float = 1e-10) -> np.ndarray:
    """Descending eigenvalues of a symmetric PSD matrix.

    Values in (-negative_tol, 0] clamp to zero; anything lower raises,
    as does an asymmetric input.
    """
    form = np.asarray(form, dtype=float)
    if form.ndim != 2 or form.shape[0] != form.shape[1]:
        raise ConfigError("spectrum input must be square")
    scale = max(1.0, float(np.abs(form).max()))
    if np.abs(form - form.T).max() > 1e-10 * scale:
        raise ConfigError("spectrum input is not symmetric")
    vals = np.linalg.eigvalsh(form)
    if vals.min() < -negative_tol:
        raise ConfigError(f"matrix has negative eigenvalue {vals.min():.3e}")
    return np.sort(np.clip(vals, 0.0, None))[::-1]


def direction_spectrum(mixing: np.ndarray, x: np.ndarray, graph: NetworkGraph,
                       alpha_variance: float) -> np.ndarray:
    """Spectrum of the direction form, via the smaller Gram factor.

    The nonzero eigenvalues of D M'M D equal those of (M D)(M D)', so
    when there are fewer measurements than edges the m x m product is
    decomposed instead.  Padded with zeros to the edge count.
    """
    x = np.asarray(x, dtype=float)
    d = x[graph.tails()]
    m, ecount = mixing.shape
    scaled = mixing * d[None, :]
    if m < ecount:
        small = alpha_variance * (scaled @ scaled.T)
        vals = np.linalg.eigvalsh(0.5 * (small + small.T))
        vals = np.concatenate([np.clip(vals, 0.0, None), np.zeros(ecount - m)])
    else:
        big = alpha_variance * (scaled.T @ scaled)
        vals = np.clip(np.linalg.eigvalsh(0.5 * (big + big.T)), 0.0, None)
    return np.sort(vals)[::-1]


@dataclass(frozen=True)
class TailSearchResult:
    """Best-effort worst case: a certified lower bound on the supremum."""

    p_tail: float
    direction: np.ndarray
    evaluations: int


def _active_spectrum(gram: np.ndarray, tails: np.ndarray, x: np.ndarray,
                     alpha_variance: float) -> np.ndarray:
    """Nonzero part of the direction-form spectrum from the mixing Gram.

    Only edges whose tail component of x is nonzero contribute, so the
    eigenproblem restricts to that block; canonical directions touch
    just one node's outgoing edges.
    """
    d = x[tails]
    active = np.flatnonzero(d)
    if active.size == 0:
        return np.zeros(1)
    block = gram[np.ix_(active, active)] * np.outer(d[active], d[active])
    block = alpha_variance * 0.5 * (block + block.T)
    return np.clip(np.linalg.eigvalsh(block), 0.0, None)


def worst_case_tail_gram(gram: np.ndarray, graph: NetworkGraph,
                         alpha_variance: float, epsilon: float,
                         budget: int = 128, seed: int = 0, *,
                         abs_tol: float = 1e-9) -> TailSearchResult:
    """`worst_case_tail` taking the precomputed Gram mixing' mixing."""
    if budget < 1:
        raise ConfigError("budget must be positive")
    n = graph.node_count
    tails = graph.tails()
    evals = 0

    def objective(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        spectrum = _active_spectrum(gram, tails, x, alpha_variance)
        return weighted_chisq_tail(spectrum, epsilon, abs_tol=abs_tol)

    best_p = -1.0
    best_x = None
    for v in range(n):
        x = np.zeros(n)
        x[v] = 1.0
        p = objective(x)
        if p > best_p:
            best_p, best_x = p, x
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5C]))
    random_starts = max(0, min(budget - evals - 2 * n, max(n // 2, 8)))
    for _ in range(random_starts):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        p = objective(x)
        if p > best_p:
            best_p, best_x = p, x
    step = 0.5
    while step >= 1e-3 and evals < budget:
        improved = False
        for i in range(n):
            if evals >= budget:
                break
            for sign in (1.0, -1.0):
                if evals >= budget:
                    break
                trial = best_x.copy()
                trial[i] += sign * step
                norm = np.linalg.norm(trial)
                if norm == 0.0:
                    continue
                trial /= norm
                p = objective(trial)
                if p > best_p:
                    best_p, best_x = p, trial
                    improved = True
                    break
        if not improved:
            step *= 0.5
    return TailSearchResult(p_tail=best_p, direction=best_x, evaluations=evals)


def worst_case_tail(mixing: np.ndarray, graph: NetworkGraph, alpha_variance: float,
                    epsilon: float, budget: int = 128, seed: int = 0, *,
                    abs_tol: float = 1e-9) -> TailSearchResult:
    """Maximize the tail probability over unit directions.

    Multi-start local search: all canonical directions are evaluated
    first, then random unit starts, then projected coordinate ascent
    with a shrinking step from the current best, until `budget`
    objective evaluations are spent.  The returned value is always a
    valid lower bound on the true worst case (every candidate is a
    feasible direction); it may understate it, never overstate it.
    Deterministic given (seed, budget).
    """
    gram = mixing.T @ mixing
    return worst_case_tail_gram(
        gram, graph, alpha_variance, epsilon, budget, seed, abs_tol=abs_tol
    )


def rip_probability_bound(p_tail: float, n: int, k: int, delta: float) -> float:
    """Lower bound on the probability of the restricted isometry property.

    Evaluates 1 - C(n,k) (42/delta)^k p_tail in log space, where p_tail
    must be the worst-case tail at deviation delta/sqrt(2).  Returns 1
    when p_tail is zero and floors at 0 when the bound is vacuous.
    """
    if not 0.0 < delta < 1.0:
        raise ConfigError("delta must lie in (0, 1)")
    if not 1 <= k <= n:
        raise ConfigError("k must lie in 1..n")
    if not 0.0 <= p_tail <= 1.0:
        raise ConfigError("p_tail must lie in [0, 1]")
    if p_tail == 0.0:
        return 1.0
    log_term = (
        gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        + k * math.log(42.0 / delta)
        + math.log(p_tail)
    )
    if log_term >= 0.0:
        return 0.0
    return float(-np.expm1(log_term))


def sphere_average_weight_sum(mixing: np.ndarray, alpha_variance: float,
                              node_count: int) -> float:
    """Average of the spectrum sum over uniformly random unit directions.

    Equals alpha_variance * ||mixing||_F^2 / n by the trace identity;
    with the calibrated injection variance this is exactly 1.
    """
    return alpha_variance * float(np.sum(mixing * mixing)) / node_count


def min_rank_limited_tail(edge_count: int, epsilon: float,
                          grid: int = 200) -> float:
    """Smallest tail any direction form of bounded rank can achieve.

    The direction form never has more nonzero eigenvalues than there
    are edges, so over equal-weight spectra w * chi2(r) with r up to
    `edge_count` and a scale grid around 1, the minimum tail is a floor
    no measurement count can beat.  Diagnostic for unreachable targets.
    """
    best = 1.0
    r = max(1, int(edge_count))
    for w in np.linspace(0.7, 1.3, grid):
        lam = np.full(r, w / r)
        best = min(best, weighted_chisq_tail(lam, epsilon, abs_tol=1e-9))
    return best


def write_tail_curve(path: str, rows) -> None:
    """Write tail-curve records as delimiter-separated text.

    One record per (deployment, m, epsilon): columns `deployment`, `m`,
    `epsilon`, `p_tail_qnc`, `p_tail_gauss`, with a header row.
    """
    lines = ["deployment,m,epsilon,p_tail_qnc,p_tail_gauss"]
    for dep, m, eps, p_qnc, p_gauss in rows:
        lines.append(f"{dep},{m},{eps!r},{p_qnc!r},{p_gauss!r}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
