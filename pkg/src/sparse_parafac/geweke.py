"""Joint-distribution ("getting it right") validation of the sampler.

Two simulators target the same joint law of (parameters, codes, data): the
marginal-conditional one draws everything fresh from the prior and the
data model, while the successive-conditional one alternates Gibbs sweeps
with regeneration of the data given the current state.  If the full
conditionals are coded correctly, both produce identical distributions for
any test function; discrepancies show up as large z-scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from .errors import ConfigError
from .gibbs import ChainState, _sample_categorical_rows, compute_suffstats, sweep
from .priors import PriorConfig, SpParafacParams, draw_prior
from .tensor import CategoricalDataset

TestFunction = Callable[[SpParafacParams, np.ndarray], float]


def default_test_functions() -> Dict[str, TestFunction]:
    """Scalar summaries spanning every updated block."""
    return {
        "tau_1": lambda params, z: float(params.tau[0]),
        "active_flags": lambda params, z: float(params.active.sum()),
        "nu_1": lambda params, z: float(params.nu[0]),
        "alpha": lambda params, z: float(params.alpha),
        "lambda_111": lambda params, z: float(params.lam[0, 0, 0]),
    }


def sample_values(params: SpParafacParams, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw a complete n x p table from the model given component codes."""
    n = z.size
    values = np.empty((n, params.p), dtype=np.int64)
    for j in range(params.p):
        d = int(params.levels[j])
        probs = params.lam[z - 1, j, :d]
        cdf = np.cumsum(probs, axis=1)
        u = rng.random(n) * cdf[:, -1]
        values[:, j] = 1 + np.minimum((u[:, None] > cdf).sum(axis=1), d - 1)
    return values


def _draw_joint(prior: PriorConfig, n_subjects: int, rng: np.random.Generator):
    params = draw_prior(prior, rng)
    with np.errstate(divide="ignore"):
        log_nu = np.log(params.nu)
    z = 1 + _sample_categorical_rows(np.tile(log_nu, (n_subjects, 1)), rng)
    return params, z


def batch_means_se(x: np.ndarray, n_batches: int = 50) -> float:
    """Standard error of the mean of a correlated series via batch means."""
    x = np.asarray(x, dtype=np.float64)
    n_batches = min(n_batches, x.size)
    size = x.size // n_batches
    means = x[: n_batches * size].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_batches))


@dataclass(eq=False)
class GewekeResult:
    """Per-test-function means, standard errors, and z-scores."""

    marginal_mean: Dict[str, float]
    marginal_se: Dict[str, float]
    successive_mean: Dict[str, float]
    successive_se: Dict[str, float]

    @property
    def zscores(self) -> Dict[str, float]:
        out = {}
        for name in self.marginal_mean:
            se = np.hypot(self.marginal_se[name], self.successive_se[name])
            out[name] = (self.successive_mean[name] - self.marginal_mean[name]) / se
        return out

    def max_abs_z(self) -> float:
        return max(abs(z) for z in self.zscores.values())


def geweke_test(
    prior: PriorConfig,
    n_subjects: int,
    n_samples: int,
    seed: int = 0,
    test_functions: Optional[Dict[str, TestFunction]] = None,
) -> GewekeResult:
    """Run both simulators for ``n_samples`` draws each and compare.

    Requires the uniform baseline (the empirical one would make the prior
    depend on the data, which breaks the comparison).
    """
    if prior.baseline_mode != "uniform":
        raise ConfigError("the joint-distribution test requires the uniform baseline")
    if test_functions is None:
        test_functions = default_test_functions()
    rng = np.random.default_rng(seed)
    names = list(test_functions)

    marg = {name: np.empty(n_samples) for name in names}
    for t in range(n_samples):
        params, z = _draw_joint(prior, n_subjects, rng)
        for name in names:
            marg[name][t] = test_functions[name](params, z)

    succ = {name: np.empty(n_samples) for name in names}
    params, z = _draw_joint(prior, n_subjects, rng)
    values = sample_values(params, z, rng)
    dataset = CategoricalDataset(values, prior.levels.copy())
    counts, occupancy = compute_suffstats(dataset, z, prior.K)
    state = ChainState(params=params, z=z, counts=counts, occupancy=occupancy, prior=prior)
    for t in range(n_samples):
        sweep(state, dataset, rng)
        for name in names:
            succ[name][t] = test_functions[name](state.params, state.z)
        dataset.values[:] = sample_values(state.params, state.z, rng)
        state.refresh_suffstats(dataset)

    return GewekeResult(
        marginal_mean={n: float(marg[n].mean()) for n in names},
        marginal_se={n: float(marg[n].std(ddof=1) / np.sqrt(n_samples)) for n in names},
        successive_mean={n: float(succ[n].mean()) for n in names},
        successive_se={n: batch_means_se(succ[n]) for n in names},
    )
