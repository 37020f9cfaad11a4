"""Joint-distribution test of the Gibbs sampler.

Two ways to sample (parameters, codes, data): draw everything from the
prior and the data model directly, or alternate Gibbs sweeps with data
regeneration.  Correct full conditionals make the two distributions
identical, so the z-scores of any test function should look like noise;
a sign error or a wrong count in any update blows them up immediately.
"""

from sparse_parafac import PriorConfig, geweke_test

N_SAMPLES = 20_000

prior = PriorConfig(levels=[2, 2, 2], K=2, gamma=1.0)
result = geweke_test(prior, n_subjects=15, n_samples=N_SAMPLES, seed=7)

print(f"{N_SAMPLES} samples per arm on p=3, d=2, n=15, K=2, gamma=1\n")
print(f"{'function':>14} {'prior arm':>12} {'gibbs arm':>12} {'z':>8}")
for name in result.marginal_mean:
    print(f"{name:>14} {result.marginal_mean[name]:>12.4f} "
          f"{result.successive_mean[name]:>12.4f} {result.zscores[name]:>8.2f}")
print(f"\nmax |z| = {result.max_abs_z():.2f}  (values above ~4 would indicate a bug)")
