"""Five-step Gibbs sampler for the sparse-PARAFAC mixture.

One sweep updates, in order: the component vectors (spike/slab mixture of
the baseline and a Dirichlet full conditional), the allocation
probabilities, the stick fractions, the subject component codes, and the
stick-breaking concentration.  All mixture and multinomial weights are
formed in log space with log-gamma and log-sum-exp; the truncation level K
is fixed, so empty components simply refresh from their priors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import gammaln

from .errors import NumericalError
from .priors import PriorConfig, SpParafacParams, _dirichlet, draw_prior, stick_breaking
from .tensor import CategoricalDataset

#: stick fractions are kept strictly below 1 so log(1 - V) stays finite
_MAX_STICK = 1.0 - 1e-15

#: subjects per block when evaluating component log-likelihoods
_Z_CHUNK_CELLS = 1 << 22


@dataclass(eq=False)
class GibbsConfig:
    """Run-length and prior settings for one chain."""

    prior: PriorConfig
    iterations: int = 25000
    burn_in: int = 10000
    thin: int = 5
    seed: int = 0
    keep_z: bool = False

    def __post_init__(self):
        if self.iterations < 1 or not 0 <= self.burn_in < self.iterations:
            raise ValueError("need 0 <= burn_in < iterations")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")

    @property
    def K(self) -> int:
        return self.prior.K

    @property
    def n_retained(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


def compute_suffstats(dataset: CategoricalDataset, z: np.ndarray, K: int):
    """Per-(component, variable, category) counts and component occupancy.

    Missing entries are excluded from the category counts.
    """
    n, p = dataset.values.shape
    dmax = int(dataset.levels.max())
    counts = np.zeros((K, p, dmax), dtype=np.int64)
    for j in range(p):
        col = dataset.values[:, j]
        obs = col > 0
        idx = (z[obs] - 1) * dmax + (col[obs] - 1)
        counts[:, j, :] = np.bincount(idx, minlength=K * dmax).reshape(K, dmax)
    occupancy = np.bincount(z - 1, minlength=K)
    return counts, occupancy


@dataclass(eq=False)
class ChainState:
    """Mutable sampler state: parameters, component codes, and sufficient
    statistics kept in sync with them."""

    params: SpParafacParams
    z: np.ndarray                 # (n,) codes in 1..K
    counts: np.ndarray            # (K, p, dmax)
    occupancy: np.ndarray         # (K,)
    prior: PriorConfig
    # static per-chain caches
    _log_baseline: np.ndarray = field(init=False)
    _a_sum: np.ndarray = field(init=False)
    _gammaln_a: np.ndarray = field(init=False)
    _gammaln_a_sum: np.ndarray = field(init=False)
    _mask: np.ndarray = field(init=False)

    def __post_init__(self):
        mask = self.prior.level_mask()
        self._mask = mask
        with np.errstate(divide="ignore"):
            self._log_baseline = np.where(mask, np.log(np.where(mask, self.params.baseline, 1.0)), 0.0)
        a = self.prior.dirichlet_a
        self._a_sum = a.sum(axis=1)
        self._gammaln_a = np.where(mask, gammaln(np.where(mask, a, 1.0)), 0.0).sum(axis=1)
        self._gammaln_a_sum = gammaln(self._a_sum)

    @classmethod
    def initialize(
        cls,
        dataset: CategoricalDataset,
        config: GibbsConfig,
        rng: np.random.Generator,
        z_init: str = "uniform",
    ) -> "ChainState":
        """Fresh state from one prior draw.

        ``z_init="uniform"`` scatters subjects over 1..K (over-dispersed
        start for inference); ``"prior"`` draws codes from the mixture
        weights, which together with the prior draw is an exact sample of
        the joint parameter-plus-code prior.
        """
        params = draw_prior(config.prior, rng, dataset=dataset)
        n = dataset.n
        if z_init == "uniform":
            z = rng.integers(1, config.K + 1, size=n)
        elif z_init == "prior":
            with np.errstate(divide="ignore"):
                log_nu = np.log(params.nu)
            z = 1 + _sample_categorical_rows(log_nu[None, :].repeat(n, 0), rng)
        else:
            raise ValueError(f"unknown z_init {z_init!r}")
        counts, occupancy = compute_suffstats(dataset, z, config.K)
        return cls(params=params, z=z, counts=counts, occupancy=occupancy, prior=config.prior)

    def refresh_suffstats(self, dataset: CategoricalDataset) -> None:
        self.counts, self.occupancy = compute_suffstats(dataset, self.z, self.prior.K)

    def validate(self, dataset: CategoricalDataset) -> None:
        """Consistency of the sufficient statistics with z and the data."""
        counts, occupancy = compute_suffstats(dataset, self.z, self.prior.K)
        if not np.array_equal(counts, self.counts):
            raise ValueError("category counts out of sync with z")
        if not np.array_equal(occupancy, self.occupancy):
            raise ValueError("occupancy out of sync with z")
        if int(self.occupancy.sum()) != dataset.n:
            raise ValueError("occupancy does not add up to n")
        self.params.validate()


def lambda_mixture_logweights(counts, tau: float, baseline, dirichlet_a):
    """Normalized log-weights (log w0, log w1) of the baseline/Dirichlet
    mixture for one component and one variable.

    ``counts``, ``baseline`` and ``dirichlet_a`` are the d_j-vectors for
    that variable.  Degenerate tau (0 or 1) returns the corresponding
    one-hot pair rather than NaN.
    """
    counts = np.asarray(counts, dtype=np.float64)
    baseline = np.asarray(baseline, dtype=np.float64)
    a = np.asarray(dirichlet_a, dtype=np.float64)
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    if tau == 0.0:
        return 0.0, -np.inf
    if tau == 1.0:
        return -np.inf, 0.0
    log_w0 = np.log1p(-tau) + float(counts @ np.log(baseline))
    log_w1 = (
        np.log(tau)
        + float(gammaln(a + counts).sum() - gammaln(a).sum())
        - float(gammaln(a.sum() + counts.sum()) - gammaln(a.sum()))
    )
    norm = np.logaddexp(log_w0, log_w1)
    return log_w0 - norm, log_w1 - norm


def _lambda_logweights_all(state: ChainState):
    """Vectorized (K, p) version of lambda_mixture_logweights."""
    tau = state.params.tau
    counts = state.counts
    mask = state._mask
    a = state.prior.dirichlet_a
    with np.errstate(divide="ignore"):
        log_tau = np.log(tau)
        log_1mtau = np.log1p(-tau)
    log_w0 = log_1mtau[:, None] + np.einsum("kjc,jc->kj", counts.astype(np.float64), state._log_baseline)
    post = np.where(mask[None], gammaln(np.where(mask[None], a[None] + counts, 1.0)), 0.0).sum(axis=2)
    ntot = counts.sum(axis=2)
    log_w1 = (
        log_tau[:, None]
        + post
        - state._gammaln_a[None, :]
        - (gammaln(state._a_sum[None, :] + ntot) - state._gammaln_a_sum[None, :])
    )
    norm = np.logaddexp(log_w0, log_w1)
    return log_w0 - norm, log_w1 - norm


def update_lambda(state: ChainState, rng: np.random.Generator) -> None:
    """Draw every component vector from its spike/slab full conditional."""
    log_w0, _ = _lambda_logweights_all(state)
    use_base = rng.random(log_w0.shape) < np.exp(log_w0)
    shapes = state.prior.dirichlet_a[None] + state.counts
    free = _dirichlet(rng, shapes, mask=state._mask[None])
    params = state.params
    params.lam = np.where(use_base[:, :, None], params.baseline[None], free)
    params.active = ~use_base


def update_tau(state: ChainState, rng: np.random.Generator) -> None:
    """Allocation probabilities from their Beta full conditionals."""
    gamma = state.prior.gamma
    params = state.params
    if gamma == 0.0:
        params.tau = np.ones(params.K)
        return
    n_active = params.active.sum(axis=1)
    params.tau = rng.beta(1.0 + n_active, gamma + (params.p - n_active))


def update_V(state: ChainState, rng: np.random.Generator) -> None:
    """Stick fractions from occupancy counts; weights recomputed."""
    params = state.params
    K = params.K
    nh = state.occupancy
    if K > 1:
        tail = nh.sum() - np.cumsum(nh)
        V_free = rng.beta(1.0 + nh[: K - 1], params.alpha + tail[: K - 1])
        params.V = np.append(np.minimum(V_free, _MAX_STICK), 1.0)
    else:
        params.V = np.ones(1)
    params.nu = stick_breaking(params.V)


def _sample_categorical_rows(log_probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Row-wise categorical draws from unnormalized log probabilities."""
    m = log_probs.max(axis=1)
    bad = ~np.isfinite(m)
    if np.any(bad):
        raise NumericalError(
            f"no component has positive probability for subject {int(np.argmax(bad)) + 1}"
        )
    w = np.exp(log_probs - m[:, None])
    cdf = np.cumsum(w, axis=1)
    u = rng.random(log_probs.shape[0]) * cdf[:, -1]
    return np.minimum((u[:, None] > cdf).sum(axis=1), log_probs.shape[1] - 1)


def update_z(state: ChainState, dataset: CategoricalDataset, rng: np.random.Generator) -> None:
    """Subject component codes from the multinomial full conditional.

    Log-likelihoods accumulate per variable with missing entries skipped;
    sufficient statistics are rebuilt afterwards.
    """
    params = state.params
    K, p = params.K, params.p
    mask = state._mask
    with np.errstate(divide="ignore"):
        log_lam = np.where(mask[None], np.log(np.where(mask[None], params.lam, 1.0)), 0.0)
        log_nu = np.log(params.nu)
    n = dataset.n
    codes = dataset.values - 1        # -1 marks missing
    observed = codes >= 0
    z = np.empty(n, dtype=np.int64)
    chunk = max(1, _Z_CHUNK_CELLS // max(1, K * p))
    jidx = np.arange(p)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        sub = codes[lo:hi]
        gath = log_lam[:, jidx[None, :], np.maximum(sub, 0)]      # (K, m, p)
        gath = np.where(observed[lo:hi][None], gath, 0.0)
        total = log_nu[None, :] + gath.sum(axis=2).T              # (m, K)
        z[lo:hi] = 1 + _sample_categorical_rows(total, rng)
    state.z = z
    state.refresh_suffstats(dataset)


def update_alpha(state: ChainState, rng: np.random.Generator) -> None:
    """Concentration from its Gamma full conditional over the K-1 free
    sticks (the last stick is pinned at 1 and excluded)."""
    params = state.params
    prior = state.prior
    n_free = params.K - 1
    rate = prior.b_alpha - float(np.log1p(-params.V[:n_free]).sum())
    params.alpha = float(rng.gamma(prior.a_alpha + n_free, 1.0 / rate))


def sweep(state: ChainState, dataset: CategoricalDataset, rng: np.random.Generator) -> None:
    """One full Gibbs sweep in the fixed step order."""
    update_lambda(state, rng)
    update_tau(state, rng)
    update_V(state, rng)
    update_z(state, dataset, rng)
    update_alpha(state, rng)


@dataclass(eq=False)
class PosteriorSampleSet:
    """Retained post-burn-in, thinned draws plus run metadata."""

    draws: List[SpParafacParams]
    meta: dict
    z_draws: Optional[List[np.ndarray]] = None

    def __len__(self) -> int:
        return len(self.draws)


def run_chain(
    dataset: CategoricalDataset,
    config: GibbsConfig,
    rng: Optional[np.random.Generator] = None,
) -> PosteriorSampleSet:
    """Run one chain and return the retained draws.

    Initialization is a prior draw with uniformly scattered component
    codes.  Single-threaded execution is bit-reproducible for a fixed
    (dataset, config, seed).
    """
    if not np.array_equal(dataset.levels, config.prior.levels):
        raise ValueError("dataset levels do not match the prior configuration")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    t0 = time.perf_counter()
    state = ChainState.initialize(dataset, config, rng)
    draws: List[SpParafacParams] = []
    z_draws: Optional[List[np.ndarray]] = [] if config.keep_z else None
    for it in range(1, config.iterations + 1):
        try:
            sweep(state, dataset, rng)
        except Exception as exc:
            exc.args = (f"iteration {it}: {exc}",)
            raise
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            draws.append(state.params.copy())
            if z_draws is not None:
                z_draws.append(state.z.copy())
    meta = {
        "seed": config.seed,
        "iterations": config.iterations,
        "burn_in": config.burn_in,
        "thin": config.thin,
        "n_retained": len(draws),
        "n_subjects": dataset.n,
        "wall_time_s": time.perf_counter() - t0,
    }
    return PosteriorSampleSet(draws=draws, meta=meta, z_draws=z_draws)
