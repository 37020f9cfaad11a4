"""Recovering sparse interactions from a small sample.

A desk-scale version of the replication scenario: p=30 binary variables,
only four of which ({2, 4, 12, 14}) carry any dependence, observed for
n=200 subjects.  The fitted factorization pushes the dependence measures
of null pairs to zero where the plug-in estimator drowns them in sampling
noise, and its credible intervals localize the nonzero coefficients.
"""

import numpy as np

from sparse_parafac import (
    ScenarioSpec,
    cramers_v_matrix,
    cramers_v_matrix_empirical,
    gen_loglinear,
    significance_decision,
    summarize_coefficients,
    true_cramers_v,
)
from sparse_parafac.harness import FitSettings, fit_dataset

COEFFS = {
    (2,): 1.0, (4,): -1.5, (12,): 2.0, (14,): 1.5,
    (2, 4): -0.5, (2, 12): 0.5, (4, 12): -0.5, (4, 14): -0.5, (12, 14): 0.5,
    (2, 4, 12): 0.25, (4, 12, 14): 0.5,
}
ACTIVE = (2, 4, 12, 14)

spec = ScenarioSpec(kind="loglinear", n=200, p=30, d=2,
                    active_set=ACTIVE, coefficients=COEFFS, seed=11)
dataset = gen_loglinear(spec)
print(f"simulated {dataset.n} x {dataset.p} binary table, dependence confined to {ACTIVE}")

samples = fit_dataset(dataset, FitSettings(iterations=5000, burn_in=2000, thin=1, K=10), seed=11)
print(f"retained {len(samples)} draws\n")

post = np.mean([cramers_v_matrix(d) for d in samples.draws], axis=0)
emp = cramers_v_matrix_empirical(dataset)
iu = np.triu_indices(dataset.p, 1)
null = np.ones((dataset.p, dataset.p), bool)
for a in ACTIVE:
    for b in ACTIVE:
        null[a - 1, b - 1] = False
print("average Cramer's V over the null pairs:")
print(f"  posterior mean : {post[iu][null[iu]].mean():.4f}")
print(f"  plug-in        : {emp[iu][null[iu]].mean():.4f}\n")

truth_v = true_cramers_v(spec)
print(f"{'pair':>10} {'true V':>8} {'posterior':>10} {'plug-in':>9}")
for (a, b), t in truth_v.items():
    print(f"{f'({a},{b})':>10} {t:>8.3f} {post[a - 1, b - 1]:>10.3f} {emp[a - 1, b - 1]:>9.3f}")

print(f"\n{'coefficient':>14} {'truth':>7} {'mean':>7} {'95% interval':>18} {'flagged':>8}")
for subset, rep in summarize_coefficients(samples, ACTIVE).items():
    truth = COEFFS.get(subset, 0.0)
    name = ",".join(map(str, subset))
    flag = "*" if significance_decision(rep) else ""
    print(f"{name:>14} {truth:>7.2f} {rep.mean:>7.2f} "
          f"[{rep.q025:>7.2f},{rep.q975:>7.2f}] {flag:>8}")
