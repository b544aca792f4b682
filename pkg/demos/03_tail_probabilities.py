"""Exact tail probabilities of squared measurement norms.

The squared norm at a unit direction is a weighted sum of independent
one-degree chi-squares; its deviation probability is computed by
characteristic-function inversion.  This script checks the integral
against closed forms and Monte Carlo, then prints the i.i.d. Gaussian
baseline curve used for comparisons.
"""

import math

import numpy as np
from scipy.stats import chi2

from qncsim import gaussian_tail, monte_carlo_tail, weighted_chisq_tail

print("=== closed-form anchors ===")
p1 = weighted_chisq_tail([1.0], 0.5)
ref1 = 1 - (chi2.cdf(1.5, 1) - chi2.cdf(0.5, 1))
print(f"single weight 1.0, eps 0.5:   integral {p1:.10f}  closed form {ref1:.10f}")
p2 = weighted_chisq_tail([0.5, 0.5], 0.5)
ref2 = 1 - (math.exp(-0.5) - math.exp(-1.5))
print(f"two weights 0.5, eps 0.5:     integral {p2:.10f}  closed form {ref2:.10f}")

print("\n=== Monte Carlo cross-check on a random spectrum ===")
rng = np.random.default_rng(0)
weights = rng.exponential(1.0, 25)
weights /= weights.sum()
for eps in (0.1, 0.3, 0.6):
    exact = weighted_chisq_tail(weights, eps)
    est, se = monte_carlo_tail(weights, eps, 200_000, seed=1)
    print(f"eps={eps}: integral {exact:.5f}  sampled {est:.5f} (+- {se:.5f})")

print("\n=== Gaussian baseline: tail vs measurement count ===")
print("rows: deviation threshold eps; columns: m")
ms = (10, 50, 100, 500, 1000)
print("eps      " + "".join(f"m={m:<10}" for m in ms))
for eps in (0.41421 / math.sqrt(2), 0.2 / math.sqrt(2)):
    row = "".join(f"{gaussian_tail(m, eps):<12.3e}" for m in ms)
    print(f"{eps:.5f} " + row)
print("(the tail decays with m; smaller eps needs many more measurements)")
