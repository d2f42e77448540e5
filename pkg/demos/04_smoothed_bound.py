"""
Smoothed expectation bound
==========================

Edge coefficients drawn from a density capped at phi. The minimum of n sums of
two such draws stays large enough that a capped log-type penalty has small
expectation. We estimate it by Monte Carlo and compare with the closed form.
"""

# %%
import numpy as np
from scipy import stats

from shapley_ndg import DistributionSpec, lemma2_mc, uniform_sum_cdf
from shapley_ndg.smoothed import make_rng

# %%
# Sums of two window draws follow a triangular law.
A = 0.5
rng = make_rng(0)
sums = rng.uniform(0, A, 10**5) + rng.uniform(0, A, 10**5)
print("KS statistic", stats.kstest(sums, lambda t: uniform_sum_cdf(t, A)).statistic)

# %%
# A non-uniform density with the same cap.
spec = DistributionSpec("capped-density", phi=2.0, density=(2.0, 0.0, 1.0, 1.0))
draws = spec.sample(make_rng(1), 10**4)
print("mean", draws.mean(), "analytic", spec.mean())

# %%
print("  n  phi alpha lam   estimate      bound   ratio")
for n in (2, 5, 10):
    for phi in (1.0, 5.0):
        r = lemma2_mc(n, phi, 1.0, 3, trials=10**5, rng_seed=n)
        print(f"{n:3d} {phi:4.0f} {1.0:5.1f} {3:3d} {r.estimate:10.5f} {r.bound:10.5f} {r.ratio:7.4f}")
assert np.isfinite(r.stderr)
