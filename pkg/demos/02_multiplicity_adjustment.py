"""Multiplicity adjustment of the sparsity penalty.

Without the penalty (gamma = 0, the dense mixture) the l1 norm of the
main-effect vector grows linearly with the number of variables: the prior
spends signal budget on every variable and would swamp inference at large
p.  Scaling gamma = 0.1 p keeps the distribution of the norm essentially
flat in p, so a constant proportion of variables is pushed onto the
baseline no matter how many are observed.
"""

from sparse_parafac import PriorConfig
from sparse_parafac.priorsim import main_effect_l1_samples

N_DRAWS = 2_000
PS = (50, 100, 150, 200)

for label, gamma_of_p in (("gamma = 0 (dense mixture)", lambda p: 0.0),
                          ("gamma = 0.1 p", lambda p: 0.1 * p)):
    print(label)
    base = None
    for p in PS:
        config = PriorConfig(levels=[2] * p, K=20, gamma=gamma_of_p(p))
        l1 = main_effect_l1_samples(config, N_DRAWS, seed=99)
        base = base or l1.mean()
        print(f"  p={p:>4}: mean ||b_main||_1 = {l1.mean():8.2f}   "
              f"(x{l1.mean() / base:.2f} vs p={PS[0]})")
    print()
