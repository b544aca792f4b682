"""Tail probabilities of weighted chi-square quadratic forms.

The squared norm of the gateway measurements at a fixed unit direction
is a positively weighted sum of independent one-degree chi-squares.
Its distribution function is recovered from the characteristic function

    cf(w) = prod_e (1 - 2j*w*lam_e)^(-mult_e/2)

by numerical inversion.  Each factor has real part 1, so the principal
complex logarithm is branch-safe and the product is evaluated as
exp(-1/2 * sum mult*log(1 - 2j*w*lam)) to avoid overflow.

The inversion integral is Hermitian in w and is therefore folded onto
(0, oo).  It is split at an adaptively chosen cutoff: the head is done
by vectorised adaptive Gauss-Kronrod panels to a 1e-9 absolute target,
and the oscillatory tail by an integration-by-parts asymptotic series
whose truncation error is driven below the same target by growing the
cutoff.  The w -> 0 limit of the integrand is finite and patched in by
its series value.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, QuadratureError

# 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

# Full symmetric node set on [-1, 1] and matching weight vectors.
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WEIGHTS_K = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WEIGHTS_G = np.zeros_like(_WEIGHTS_K)
_WEIGHTS_G[1:-1:2] = np.concatenate([_WG[:-1], _WG[::-1]])

_SERIES_TERMS = 10
_MAX_PANELS = 16384
_EVAL_CHUNK = 4_000_000


def _log_cf(w: np.ndarray, lam: np.ndarray, mult: np.ndarray) -> np.ndarray:
    """log characteristic function at frequencies `w` (vectorised)."""
    z = np.log1p(-2j * np.multiply.outer(w, lam))
    return -0.5 * (z * mult).sum(axis=-1)


def _cdf_integrand(w: np.ndarray, x: float, lam: np.ndarray, mult: np.ndarray) -> np.ndarray:
    """Im[cf(w) exp(-j*w*x)] / w, with the finite w->0 limit patched in."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    small = w < 1e-10
    if small.any():
        out[small] = float((lam * mult).sum()) - x
    big = ~small
    if big.any():
        wb = w[big]
        vals = np.empty(wb.shape, dtype=complex)
        # Chunk the (frequencies x weights) broadcast to bound memory.
        step = max(1, _EVAL_CHUNK // max(1, lam.size))
        for i in range(0, wb.size, step):
            sl = slice(i, i + step)
            vals[sl] = np.exp(_log_cf(wb[sl], lam, mult) - 1j * wb[sl] * x)
        out[big] = vals.imag / wb
    return out


def _integrate_head(x: float, lam: np.ndarray, mult: np.ndarray,
                    cutoff: float, abs_tol: float) -> float:
    """Adaptive Gauss-Kronrod integral of the inversion integrand on [0, cutoff]."""
    oscillations = cutoff * x / math.pi
    n0 = int(min(1024, max(16, math.ceil(oscillations / 2) + 8)))
    bounds = np.linspace(0.0, cutoff, n0 + 1)
    a, b = bounds[:-1], bounds[1:]

    def gk(a_arr, b_arr):
        mid = 0.5 * (a_arr + b_arr)
        half = 0.5 * (b_arr - a_arr)
        pts = mid[:, None] + half[:, None] * _NODES[None, :]
        vals = _cdf_integrand(pts.ravel(), x, lam, mult).reshape(pts.shape)
        approx_k = (vals * _WEIGHTS_K).sum(axis=1) * half
        approx_g = (vals * _WEIGHTS_G).sum(axis=1) * half
        return approx_k, np.abs(approx_k - approx_g)

    val, err = gk(a, b)
    while err.sum() > abs_tol:
        if a.size >= _MAX_PANELS:
            raise QuadratureError(
                f"panel quadrature stalled at {a.size} panels "
                f"(error {err.sum():.3e} > {abs_tol:.1e})"
            )
        # Split every panel holding more than its share of the budget.
        refine = err > abs_tol / (2 * a.size)
        if not refine.any():
            refine = err >= err.max()
        keep_a, keep_b = a[~refine], b[~refine]
        keep_val, keep_err = val[~refine], err[~refine]
        mid = 0.5 * (a[refine] + b[refine])
        new_a = np.concatenate([a[refine], mid])
        new_b = np.concatenate([mid, b[refine]])
        new_val, new_err = gk(new_a, new_b)
        a = np.concatenate([keep_a, new_a])
        b = np.concatenate([keep_b, new_b])
        val = np.concatenate([keep_val, new_val])
        err = np.concatenate([keep_err, new_err])
    return float(val.sum())


def _ibp_tail(cutoff: float, x: float, lam: np.ndarray, mult: np.ndarray,
              terms: int = _SERIES_TERMS) -> tuple[complex, float]:
    """Integration-by-parts series for int_cutoff^inf cf(w)/w * exp(-j*w*x) dw.

    Returns the series value and an error estimate from the geometric
    decay of the final terms (infinite when the series is not settling).
    """
    u_ratio = lam / (1.0 - 2j * cutoff * lam)
    t_pows = np.empty(terms + 1, dtype=complex)
    for k in range(1, terms + 1):
        t_pows[k] = (mult * u_ratio**k).sum()
    # Derivatives of log cf: L_k = j^k 2^(k-1) (k-1)! T_k.
    log_derivs = np.empty(terms + 1, dtype=complex)
    for k in range(1, terms + 1):
        log_derivs[k] = (1j**k) * (2.0 ** (k - 1)) * math.factorial(k - 1) * t_pows[k]
    cf_derivs = np.empty(terms, dtype=complex)
    cf_derivs[0] = np.exp(_log_cf(np.array([cutoff]), lam, mult))[0]
    for k in range(terms - 1):
        cf_derivs[k + 1] = sum(
            math.comb(k, i) * cf_derivs[i] * log_derivs[k + 1 - i] for i in range(k + 1)
        )
    # Derivatives of cf(w)/w via Leibniz against w^(-1).
    psi_derivs = np.empty(terms, dtype=complex)
    for k in range(terms):
        acc = 0.0 + 0.0j
        for i in range(k + 1):
            acc += (
                math.comb(k, i)
                * cf_derivs[i]
                * ((-1.0) ** (k - i))
                * math.factorial(k - i)
                * cutoff ** (-(k - i + 1))
            )
        psi_derivs[k] = acc
    jx = 1j * x
    series_terms = np.array([psi_derivs[k] / jx ** (k + 1) for k in range(terms)])
    value = np.exp(-1j * x * cutoff) * series_terms.sum()
    mags = np.abs(series_terms)
    last, prev = mags[-1], mags[-2]
    if prev == 0.0:
        return value, float(last)
    ratio = last / prev
    if ratio >= 0.99:
        return value, math.inf
    return value, float(last * ratio / (1.0 - ratio))


def _weighted_cdf(x: float, lam: np.ndarray, mult: np.ndarray, abs_tol: float) -> float:
    """P(sum lam_e * chi2(mult_e) <= x) by characteristic-function inversion."""
    if x <= 0.0:
        return 0.0
    tail_tol = 0.1 * abs_tol
    cutoff = max(32.0, 48.0 / x)
    tail_val = None
    for _ in range(80):
        value, err = _ibp_tail(cutoff, x, lam, mult)
        if err <= tail_tol:
            tail_val = value
            break
        cutoff *= 1.6
        if cutoff > 1e9:
            break
    if tail_val is None:
        raise QuadratureError(
            f"tail series failed to reach {tail_tol:.1e} by cutoff {cutoff:.3e}"
        )
    head = _integrate_head(x, lam, mult, cutoff, 0.9 * abs_tol)
    cdf = 0.5 - (head + float(tail_val.imag)) / math.pi
    return min(1.0, max(0.0, float(cdf)))


def _clean_weights(weights) -> np.ndarray:
    lam = np.asarray(weights, dtype=float).ravel()
    if lam.size == 0:
        raise ConfigError("spectrum is empty")
    if (lam < -1e-10).any():
        raise ConfigError(f"negative weight {lam.min():.3e} below -1e-10")
    return np.clip(lam, 0.0, None)


def weighted_chisq_tail(weights, epsilon: float, *, abs_tol: float = 1e-9) -> float:
    """P(|sum_e lam_e*chi2_e - 1| >= epsilon) for one-degree chi-squares.

    `weights` are the spectrum values lam_e >= 0 (entries in
    (-1e-10, 0] are clamped to zero, anything lower is rejected).  An
    all-zero spectrum short-circuits to 1 for epsilon <= 1 and 0 above.
    The result is clamped to [0, 1].
    """
    if not epsilon > 0.0:
        raise ConfigError("epsilon must be positive")
    lam = _clean_weights(weights)
    lam = lam[lam > 0.0]
    if lam.size == 0:
        return 1.0 if epsilon <= 1.0 else 0.0
    mult = np.ones_like(lam)
    upper = _weighted_cdf(1.0 + epsilon, lam, mult, abs_tol)
    lower = _weighted_cdf(1.0 - epsilon, lam, mult, abs_tol)
    return min(1.0, max(0.0, 1.0 - upper + lower))


def gaussian_tail(m: int, epsilon: float, *, abs_tol: float = 1e-9) -> float:
    """Worst-case tail of an i.i.d. Gaussian matrix with m rows.

    For unit directions, the squared norm under entries of variance 1/m
    is (1/m)*chi2(m), so this equals `weighted_chisq_tail` with m copies
    of 1/m; both are computed through the same inversion integral.
    """
    if m < 1 or int(m) != m:
        raise ConfigError("m must be a positive integer")
    if not epsilon > 0.0:
        raise ConfigError("epsilon must be positive")
    lam = np.array([1.0 / m])
    mult = np.array([float(m)])
    upper = _weighted_cdf(1.0 + epsilon, lam, mult, abs_tol)
    lower = _weighted_cdf(1.0 - epsilon, lam, mult, abs_tol)
    return min(1.0, max(0.0, 1.0 - upper + lower))


def monte_carlo_tail(weights, epsilon: float, sample_count: int, seed) -> tuple[float, float]:
    """Monte Carlo estimate of the weighted chi-square tail.

    Draws standard normals g_e and returns the fraction of samples with
    |sum lam_e g_e^2 - 1| >= epsilon together with its binomial standard
    error.  Serves as the independent oracle for the inversion integral.
    """
    if sample_count < 10_000:
        raise ConfigError("sample_count must be at least 10^4")
    lam = _clean_weights(weights)
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = max(1, _EVAL_CHUNK // max(1, lam.size))
    done = 0
    while done < sample_count:
        take = min(chunk, sample_count - done)
        g = rng.standard_normal((take, lam.size))
        q = (g * g) @ lam
        hits += int(np.count_nonzero(np.abs(q - 1.0) >= epsilon))
        done += take
    est = hits / sample_count
    std_err = math.sqrt(est * (1.0 - est) / sample_count)
    return est, std_err
