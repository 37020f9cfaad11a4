"""How the factorization prior shrinks log-linear effects.

Drawing probability tensors from the prior at p=3 binary variables and
reparameterizing each draw into main effects and interactions shows a
spike-at-zero, heavy-tailed shrinkage prior that tightens with the
interaction order and with the sparsity penalty gamma.
"""

import numpy as np

from sparse_parafac import PriorConfig, summarize_values
from sparse_parafac.priorsim import induced_coefficient_samples

N_DRAWS = 10_000

print(f"{N_DRAWS} prior draws at p=3, d=2, uniform baseline\n")
print(f"{'gamma':>6} {'coeff':>8} {'mean':>8} {'std':>7} {'min':>8} {'max':>7} "
      f"{'skew':>7} {'kurt':>8}")
for gamma in (1.0, 5.0, 20.0):
    config = PriorConfig(levels=[2, 2, 2], K=20, gamma=gamma)
    samples = induced_coefficient_samples(config, N_DRAWS, seed=2024)
    for subset, label in [((1,), "b1"), ((1, 2), "b12"), ((1, 2, 3), "b123")]:
        rep = summarize_values(samples[subset])
        print(f"{gamma:>6.0f} {label:>8} {rep.mean:>8.3f} {rep.std:>7.3f} "
              f"{rep.min:>8.3f} {rep.max:>7.3f} {rep.skewness:>7.2f} {rep.kurtosis:>8.1f}")
    print()

config = PriorConfig(levels=[2, 2, 2], K=20, gamma=1.0)
samples = induced_coefficient_samples(config, N_DRAWS, seed=2024)
b1 = samples[(1,)]
inner = np.mean(np.abs(b1) < 0.05)
print(f"at gamma=1, {inner:.0%} of main-effect draws sit within 0.05 of zero,")
print(f"yet the extremes reach {b1.min():.2f} and {b1.max():.2f}: "
       "a spike at zero with heavy tails.")
