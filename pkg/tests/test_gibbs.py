"""Full-conditional updates checked against closed-form conditional
moments, plus chain bookkeeping, determinism, and a quick
joint-distribution smoke test (the full-length one lives in the
acceptance suite)."""

import math

import numpy as np
import pytest

from sparse_parafac import (
    CategoricalDataset,
    ChainState,
    GibbsConfig,
    PriorConfig,
    cell_prob,
    draw_prior,
    full_tensor,
    geweke_test,
    l1_distance,
    lambda_mixture_logweights,
    run_chain,
    update_alpha,
    update_lambda,
    update_tau,
    update_V,
    update_z,
)
from sparse_parafac.gibbs import compute_suffstats, sweep


def make_state(levels, K, gamma, seed=0, dataset=None):
    """State with a prior draw and empty data unless a dataset is given."""
    prior = PriorConfig(levels=levels, K=K, gamma=gamma)
    rng = np.random.default_rng(seed)
    params = draw_prior(prior, rng)
    if dataset is None:
        values = np.zeros((0, prior.p), dtype=np.int64)
        dataset = CategoricalDataset(values=values, levels=levels)
    z = rng.integers(1, K + 1, size=dataset.n)
    counts, occupancy = compute_suffstats(dataset, z, K)
    state = ChainState(params=params, z=z, counts=counts, occupancy=occupancy, prior=prior)
    return state, dataset, rng


class TestLambdaMixtureLogweights:
    def test_empty_cluster_reduces_to_prior(self):
        lw0, lw1 = lambda_mixture_logweights([0, 0], 0.4, [0.5, 0.5], [1.0, 1.0])
        assert math.exp(lw0) == pytest.approx(0.6, abs=1e-12)
        assert math.exp(lw1) == pytest.approx(0.4, abs=1e-12)

    def test_tau_one_forces_dirichlet(self):
        lw0, lw1 = lambda_mixture_logweights([3, 2], 1.0, [0.5, 0.5], [1.0, 1.0])
        assert lw0 == -np.inf and lw1 == 0.0

    def test_tau_zero_forces_baseline(self):
        lw0, lw1 = lambda_mixture_logweights([3, 2], 0.0, [0.5, 0.5], [1.0, 1.0])
        assert lw0 == 0.0 and lw1 == -np.inf

    def test_exact_integer_gamma_oracle(self):
        # counts (2,1), flat Dirichlet, uniform baseline, tau 1/2:
        # w0 : w1 = (1/2)(1/2)^3 : (1/2) Gamma(3)Gamma(2)/Gamma(5) = 3 : 2
        lw0, lw1 = lambda_mixture_logweights([2, 1], 0.5, [0.5, 0.5], [1.0, 1.0])
        assert math.exp(lw0) == pytest.approx(0.6, abs=1e-12)
        assert math.exp(lw1) == pytest.approx(0.4, abs=1e-12)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            lambda_mixture_logweights([-1, 0], 0.5, [0.5, 0.5], [1.0, 1.0])
        with pytest.raises(ValueError):
            lambda_mixture_logweights([0, 0], 1.5, [0.5, 0.5], [1.0, 1.0])


class TestUpdateLambda:
    def test_tau_zero_deactivates_everything(self):
        state, _, rng = make_state([2, 2], K=3, gamma=1.0)
        state.params.tau = np.zeros(3)
        update_lambda(state, rng)
        assert not state.params.active.any()
        assert np.array_equal(state.params.lam, np.tile(state.params.baseline, (3, 1, 1)))

    def test_conditional_dirichlet_mean(self):
        """Active draws with counts (5,0) and flat prior have mean 6/7."""
        state, _, rng = make_state([2], K=1, gamma=1.0)
        state.params.tau = np.array([0.5])
        state.counts = np.array([[[5, 0]]], dtype=np.int64)
        vals = []
        for _ in range(10_000):
            update_lambda(state, rng)
            if state.params.active[0, 0]:
                vals.append(state.params.lam[0, 0, 0])
        vals = np.asarray(vals)
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - 6.0 / 7.0) < 3 * se


class TestUpdateTau:
    def test_conditional_beta_mean(self):
        """3 active flags of 10 with gamma=2 give Beta(4, 9), mean 4/13."""
        state, _, rng = make_state([2] * 10, K=1, gamma=2.0)
        flags = np.zeros((1, 10), dtype=bool)
        flags[0, :3] = True
        taus = np.empty(10_000)
        for t in range(taus.size):
            state.params.active = flags
            update_tau(state, rng)
            taus[t] = state.params.tau[0]
        se = taus.std(ddof=1) / np.sqrt(taus.size)
        assert abs(taus.mean() - 4.0 / 13.0) < 3 * se

    def test_gamma_zero_keeps_tau_one(self):
        state, _, rng = make_state([2, 2], K=2, gamma=0.0)
        update_tau(state, rng)
        assert np.all(state.params.tau == 1.0)


class TestUpdateV:
    def test_no_data_recovers_prior(self):
        """With no subjects, V_h ~ Beta(1, alpha)."""
        state, _, rng = make_state([2], K=4, gamma=1.0)
        state.params.alpha = 3.0
        vs = np.empty((4000, 3))
        for t in range(vs.shape[0]):
            update_V(state, rng)
            vs[t] = state.params.V[:3]
        se = vs.ravel().std(ddof=1) / np.sqrt(vs.size)
        assert abs(vs.mean() - 1.0 / 4.0) < 3 * se

    def test_occupancy_oracle(self):
        """Occupancy (6,3,1) with alpha=1: E V_1 = 7/12."""
        state, _, rng = make_state([2], K=3, gamma=1.0)
        state.params.alpha = 1.0
        state.occupancy = np.array([6, 3, 1])
        v1 = np.empty(10_000)
        for t in range(v1.size):
            update_V(state, rng)
            v1[t] = state.params.V[0]
        se = v1.std(ddof=1) / np.sqrt(v1.size)
        assert abs(v1.mean() - 7.0 / 12.0) < 3 * se

    def test_weights_stay_normalized(self):
        state, _, rng = make_state([2], K=5, gamma=1.0)
        state.occupancy = np.array([10, 0, 3, 0, 1])
        for _ in range(50):
            update_V(state, rng)
            assert abs(state.params.nu.sum() - 1.0) < 1e-12
            assert state.params.V[-1] == 1.0


class TestUpdateZ:
    @staticmethod
    def two_component_state(y_row):
        prior = PriorConfig(levels=[2, 2], K=2, gamma=1.0)
        params = draw_prior(prior, np.random.default_rng(3))
        params.nu = np.array([0.3, 0.7])
        params.V = np.array([0.3, 1.0])
        lam = np.zeros((2, 2, 2))
        lam[0, 0] = [0.9, 0.1]
        lam[0, 1] = [0.6, 0.4]
        lam[1, 0] = [0.2, 0.8]
        lam[1, 1] = [0.5, 0.5]
        params.lam = lam
        dataset = CategoricalDataset(values=[y_row], levels=[2, 2])
        z = np.array([1])
        counts, occ = compute_suffstats(dataset, z, 2)
        state = ChainState(params=params, z=z, counts=counts, occupancy=occ, prior=prior)
        return state, dataset

    def test_single_component(self):
        state, dataset, rng = make_state(
            [2, 2], K=1, gamma=1.0,
            dataset=CategoricalDataset(values=[[1, 2], [2, 2]], levels=[2, 2]),
        )
        update_z(state, dataset, rng)
        assert np.all(state.z == 1)

    def test_identical_components_sample_from_weights(self):
        state, dataset = self.two_component_state([1, 2])
        state.params.lam[1] = state.params.lam[0]
        rng = np.random.default_rng(11)
        hits = np.empty(20_000)
        for t in range(hits.size):
            update_z(state, dataset, rng)
            hits[t] = state.z[0] == 1
        se = np.sqrt(0.3 * 0.7 / hits.size)
        assert abs(hits.mean() - 0.3) < 3 * se

    def test_hand_evaluated_ratio(self):
        # y=(1,2): w1 = .3*.9*.4 = .108, w2 = .7*.2*.5 = .07
        state, dataset = self.two_component_state([1, 2])
        target = 0.108 / (0.108 + 0.07)
        rng = np.random.default_rng(5)
        hits = np.empty(20_000)
        for t in range(hits.size):
            update_z(state, dataset, rng)
            hits[t] = state.z[0] == 1
        se = np.sqrt(target * (1 - target) / hits.size)
        assert abs(hits.mean() - target) < 3 * se

    def test_missing_entries_skipped(self):
        # y=(1,missing): w1 = .3*.9 = .27, w2 = .7*.2 = .14
        state, dataset = self.two_component_state([1, 0])
        target = 0.27 / (0.27 + 0.14)
        rng = np.random.default_rng(6)
        hits = np.empty(20_000)
        for t in range(hits.size):
            update_z(state, dataset, rng)
            hits[t] = state.z[0] == 1
        se = np.sqrt(target * (1 - target) / hits.size)
        assert abs(hits.mean() - target) < 3 * se

    def test_suffstats_rebuilt(self):
        state, dataset, rng = make_state(
            [2, 2], K=2, gamma=1.0,
            dataset=CategoricalDataset(values=[[1, 2], [2, 0], [1, 1]], levels=[2, 2]),
        )
        update_z(state, dataset, rng)
        state.validate(dataset)


class TestUpdateAlpha:
    def test_no_free_sticks_recovers_prior(self):
        state, _, rng = make_state([2], K=1, gamma=1.0)
        draws = np.empty(20_000)
        for t in range(draws.size):
            update_alpha(state, rng)
            draws[t] = state.params.alpha
        se = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - 1.0) < 3 * se  # Gamma(1, 1) prior

    def test_gamma_mean_oracle(self):
        """One free stick at 1/2: alpha ~ Gamma(2, 1 + log 2)."""
        state, _, rng = make_state([2], K=2, gamma=1.0)
        state.params.V = np.array([0.5, 1.0])
        draws = np.empty(20_000)
        for t in range(draws.size):
            update_alpha(state, rng)
            draws[t] = state.params.alpha
        rate = 1.0 + math.log(2.0)
        se = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - 2.0 / rate) < 3 * se
        # scale convention: variance / mean = 1 / rate
        ratio = draws.var(ddof=1) / draws.mean()
        assert abs(ratio - 1.0 / rate) < 0.02


class TestRunChain:
    @staticmethod
    def small_dataset(n=12, seed=1):
        rng = np.random.default_rng(seed)
        return CategoricalDataset(values=rng.integers(1, 3, size=(n, 3)), levels=[2, 2, 2])

    def test_retention_bookkeeping(self):
        dataset = self.small_dataset()
        config = GibbsConfig(
            prior=PriorConfig(levels=[2, 2, 2], K=2, gamma=1.0),
            iterations=10, burn_in=0, thin=1, seed=4,
        )
        samples = run_chain(dataset, config)
        assert len(samples) == 10 == config.n_retained

    def test_default_run_length_yields_3000(self):
        config = GibbsConfig(prior=PriorConfig(levels=[2, 2], gamma=1.0), seed=0)
        assert config.n_retained == 3000

    def test_gamma_zero_never_touches_baseline(self):
        dataset = self.small_dataset()
        config = GibbsConfig(
            prior=PriorConfig(levels=[2, 2, 2], K=2, gamma=0.0),
            iterations=40, burn_in=0, thin=1, seed=9,
        )
        samples = run_chain(dataset, config)
        assert all(draw.active.all() for draw in samples.draws)

    def test_deterministic_given_seed(self):
        dataset = self.small_dataset()
        config = GibbsConfig(
            prior=PriorConfig(levels=[2, 2, 2], K=3, gamma=1.0),
            iterations=30, burn_in=10, thin=2, seed=123,
        )
        a = run_chain(dataset, config)
        b = run_chain(dataset, config)
        assert len(a) == len(b) == 10
        for da, db in zip(a.draws, b.draws):
            assert np.array_equal(da.lam, db.lam)
            assert np.array_equal(da.nu, db.nu)
            assert da.alpha == db.alpha

    def test_state_invariants_after_sweeps(self):
        dataset = self.small_dataset(n=20)
        state, _, rng = make_state([2, 2, 2], K=3, gamma=1.0, dataset=dataset)
        for _ in range(25):
            sweep(state, dataset, rng)
            state.validate(dataset)

    def test_missing_data_supported(self):
        rng = np.random.default_rng(2)
        values = rng.integers(1, 3, size=(15, 3))
        values[rng.random(values.shape) < 0.2] = 0
        dataset = CategoricalDataset(values=values, levels=[2, 2, 2])
        config = GibbsConfig(
            prior=PriorConfig(levels=[2, 2, 2], K=2, gamma=1.0),
            iterations=20, burn_in=5, thin=3, seed=8,
        )
        samples = run_chain(dataset, config)
        assert len(samples) == 5
        for draw in samples.draws:
            draw.validate()

    def test_permuting_components_preserves_tensor(self):
        dataset = self.small_dataset()
        config = GibbsConfig(
            prior=PriorConfig(levels=[2, 2, 2], K=4, gamma=1.0),
            iterations=10, burn_in=5, thin=1, seed=21,
        )
        draw = run_chain(dataset, config).draws[-1]
        permuted = draw.permute_components(np.array([2, 0, 3, 1]))
        assert l1_distance(full_tensor(draw), full_tensor(permuted)) < 1e-12
        assert cell_prob(draw, (1, 2, 1)) == pytest.approx(
            cell_prob(permuted, (1, 2, 1)), abs=1e-14
        )


class TestGewekeSmoke:
    def test_short_run_consistency(self):
        """4,000 samples per arm keep every z-score below 5; the
        full-length certification runs in the acceptance suite."""
        prior = PriorConfig(levels=[2, 2, 2], K=2, gamma=1.0)
        result = geweke_test(prior, n_subjects=15, n_samples=4000, seed=31)
        assert result.max_abs_z() < 5.0
