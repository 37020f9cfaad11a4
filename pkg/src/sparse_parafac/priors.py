"""Hierarchical prior of the sparse-PARAFAC mixture and prior sampling.

The model state couples stick-breaking mixture weights, per-component
beta-bernoulli allocation of variables to an "active" (free Dirichlet) or
"baseline" (fixed vector) role, and the component probability vectors
themselves.  ``gamma`` is the sparsity penalty: larger values push more
variables onto the baseline; ``gamma = 0`` recovers the dense mixture where
every variable is active in every component.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import betaln, gammaln

from .errors import ConfigError, DataError
from .tensor import CategoricalDataset, check_simplex

BASELINE_MODES = ("uniform", "empirical")

#: floor applied to Dirichlet gamma shapes; far below any shape used in
#: practice (prior and posterior shapes are >= the concentration, default 1)
MIN_GAMMA_SHAPE = 1e-3

#: recommended sparsity penalty per variable (gamma = 0.2 p)
DEFAULT_GAMMA_RATE = 0.2


def stick_breaking(V) -> np.ndarray:
    """Mixture weights from stick fractions: nu_h = V_h prod_{l<h} (1 - V_l).

    The last fraction must be 1; the last weight is computed as the
    complement of the rest so the weights sum to 1 exactly.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 1 or V.size == 0:
        raise ValueError("V must be a nonempty 1-d vector")
    if np.any(V < 0.0) or np.any(V > 1.0):
        raise ValueError("stick fractions must lie in [0, 1]")
    if V[-1] != 1.0:
        raise ValueError("the last stick fraction must equal 1")
    nu = V * np.concatenate(([1.0], np.cumprod(1.0 - V[:-1])))
    nu[-1] = max(0.0, 1.0 - float(nu[:-1].sum()))
    return nu


def inverse_stick_breaking(nu) -> np.ndarray:
    """Stick fractions reproducing the given weights (last fraction 1)."""
    nu = np.asarray(nu, dtype=np.float64)
    V = np.empty_like(nu)
    tail = 1.0
    for h in range(nu.size - 1):
        V[h] = 0.0 if tail <= 0.0 else min(1.0, nu[h] / tail)
        tail -= nu[h]
    V[-1] = 1.0
    return V


def beta_bernoulli_pmf(p: int, gamma: float, s: int) -> float:
    """Pmf of the number of active variables in one component after
    integrating out its allocation probability.

    Equals C(p, s) B(1 + s, gamma + p - s) / B(1, gamma), computed through
    log-gamma for stability.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if not 0 <= s <= p:
        raise ValueError(f"s={s} out of range 0..{p}")
    log_choose = gammaln(p + 1) - gammaln(s + 1) - gammaln(p - s + 1)
    return float(np.exp(log_choose + betaln(1.0 + s, gamma + p - s) - betaln(1.0, gamma)))


def baseline_vector(
    mode: str,
    j: int,
    dataset: Optional[CategoricalDataset] = None,
    levels: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Baseline probability vector for variable j (1-based).

    ``uniform`` is 1/d_j everywhere; ``empirical`` uses category
    proportions over the non-missing entries of the column, flooring
    zero-count categories at 1/(2n) and renormalizing so the vector stays
    strictly positive.
    """
    if mode not in BASELINE_MODES:
        raise ConfigError(f"baseline mode must be one of {BASELINE_MODES}, got {mode!r}")
    if mode == "uniform":
        if dataset is not None:
            d = int(dataset.levels[j - 1])
        elif levels is not None:
            d = int(levels[j - 1])
        else:
            raise ConfigError("uniform baseline needs levels or a dataset")
        return np.full(d, 1.0 / d)
    if dataset is None:
        raise ConfigError("empirical baseline requires a dataset")
    d = int(dataset.levels[j - 1])
    col = dataset.column(j)
    obs = col[col > 0]
    if obs.size == 0:
        raise DataError(f"variable {j} has no observed values for the empirical baseline")
    counts = np.bincount(obs - 1, minlength=d).astype(np.float64)
    props = counts / obs.size
    floor = 1.0 / (2.0 * obs.size)
    props = np.maximum(props, floor)
    return props / props.sum()


def _dirichlet(rng: np.random.Generator, shapes: np.ndarray, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Dirichlet draws along the last axis via normalized gamma variables.

    Shapes are floored at MIN_GAMMA_SHAPE; entries outside ``mask`` come
    out 0.  An all-underflow row falls back to uniform over the mask.
    """
    shapes = np.maximum(np.asarray(shapes, dtype=np.float64), MIN_GAMMA_SHAPE)
    if mask is not None:
        shapes = np.where(mask, shapes, 1.0)
    g = rng.standard_gamma(shapes)
    if mask is not None:
        g = g * mask
    tot = g.sum(axis=-1, keepdims=True)
    bad = tot == 0.0
    if np.any(bad):
        fallback = np.ones_like(g) if mask is None else np.broadcast_to(mask, g.shape).astype(float)
        g = np.where(bad, fallback, g)
        tot = g.sum(axis=-1, keepdims=True)
    return g / tot


@dataclass(eq=False)
class PriorConfig:
    """Hyperparameters of the sparse-PARAFAC prior.

    ``gamma=None`` resolves to the recommended default 0.2 p.
    ``dirichlet_a`` is a (p, max d_j) array of Dirichlet concentrations
    (entries beyond d_j ignored); ``None`` means all ones.
    """

    levels: Sequence[int]
    K: int = 20
    gamma: Optional[float] = None
    a_alpha: float = 1.0
    b_alpha: float = 1.0
    dirichlet_a: Optional[np.ndarray] = None
    baseline_mode: str = "uniform"

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=np.int64)
        if self.levels.ndim != 1 or self.levels.size == 0 or np.any(self.levels < 2):
            raise ConfigError("levels must list one size >= 2 per variable")
        if self.K < 1:
            raise ConfigError("truncation level K must be >= 1")
        if self.gamma is None:
            self.gamma = DEFAULT_GAMMA_RATE * self.p
        self.gamma = float(self.gamma)
        if self.gamma < 0.0:
            raise ConfigError("gamma must be >= 0")
        if self.a_alpha <= 0.0 or self.b_alpha <= 0.0:
            raise ConfigError("a_alpha and b_alpha must be positive")
        if self.baseline_mode not in BASELINE_MODES:
            raise ConfigError(f"baseline mode must be one of {BASELINE_MODES}")
        mask = self.level_mask()
        if self.dirichlet_a is None:
            self.dirichlet_a = mask.astype(np.float64)
        else:
            self.dirichlet_a = np.asarray(self.dirichlet_a, dtype=np.float64)
            if self.dirichlet_a.shape != mask.shape:
                raise ConfigError(f"dirichlet_a must have shape {mask.shape}")
            if np.any(self.dirichlet_a[mask] <= 0.0):
                raise ConfigError("dirichlet_a entries must be positive")
            self.dirichlet_a = np.where(mask, self.dirichlet_a, 0.0)

    @property
    def p(self) -> int:
        return int(self.levels.size)

    @property
    def dmax(self) -> int:
        return int(self.levels.max())

    def level_mask(self) -> np.ndarray:
        """(p, dmax) boolean array marking the valid categories per variable."""
        return np.arange(self.dmax)[None, :] < self.levels[:, None]


@dataclass(eq=False)
class SpParafacParams:
    """Full model state.

    ``lam[h, j]`` always holds the vector in effect for component h+1 and
    variable j+1: a free Dirichlet draw where ``active[h, j]`` is set and
    the baseline vector otherwise.  Arrays are padded to the largest d_j
    with zeros.
    """

    levels: np.ndarray        # (p,) category counts
    V: np.ndarray             # (K,) stick fractions, V[-1] == 1
    nu: np.ndarray            # (K,) mixture weights
    alpha: float              # stick-breaking concentration
    tau: np.ndarray           # (K,) allocation probabilities
    active: np.ndarray        # (K, p) allocation flags
    lam: np.ndarray           # (K, p, dmax) component vectors in effect
    baseline: np.ndarray      # (p, dmax) fixed baseline vectors

    @property
    def K(self) -> int:
        return int(self.nu.size)

    @property
    def p(self) -> int:
        return int(self.levels.size)

    @property
    def dmax(self) -> int:
        return int(self.lam.shape[2])

    def level_mask(self) -> np.ndarray:
        return np.arange(self.dmax)[None, :] < self.levels[:, None]

    def copy(self) -> "SpParafacParams":
        return SpParafacParams(
            levels=self.levels.copy(),
            V=self.V.copy(),
            nu=self.nu.copy(),
            alpha=float(self.alpha),
            tau=self.tau.copy(),
            active=self.active.copy(),
            lam=self.lam.copy(),
            baseline=self.baseline.copy(),
        )

    def validate(self, atol: float = 1e-8) -> None:
        """Check all structural invariants; raises ValueError on breakage."""
        K, p, dmax = self.K, self.p, self.dmax
        if self.V.shape != (K,) or self.tau.shape != (K,):
            raise ValueError("V and tau must have one entry per component")
        if self.V[-1] != 1.0:
            raise ValueError("last stick fraction must be 1")
        if np.any(self.V < 0.0) or np.any(self.V > 1.0):
            raise ValueError("stick fractions out of [0, 1]")
        if np.any(self.tau < 0.0) or np.any(self.tau > 1.0):
            raise ValueError("allocation probabilities out of [0, 1]")
        if not self.alpha > 0.0:
            raise ValueError("alpha must be positive")
        if self.active.shape != (K, p) or self.lam.shape != (K, p, dmax):
            raise ValueError("allocation/component array shapes inconsistent")
        if np.any(self.nu < 0.0) or abs(float(self.nu.sum()) - 1.0) > atol:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        mask = self.level_mask()
        if np.any(self.lam[:, ~mask] != 0.0) or np.any(self.baseline[~mask] != 0.0):
            raise ValueError("padding entries must be zero")
        for j in range(p):
            d = int(self.levels[j])
            check_simplex(self.baseline[j, :d], name=f"baseline of variable {j + 1}")
            for h in range(K):
                check_simplex(self.lam[h, j, :d], name=f"component {h + 1}, variable {j + 1}")

    def permute_components(self, perm) -> "SpParafacParams":
        """The same mixture with components relabeled by ``perm``.

        Stick fractions are re-derived from the permuted weights; every
        exported functional (tensor cells, marginals, dependence measures)
        is invariant under this relabeling.
        """
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.K)):
            raise ValueError("perm must be a permutation of 0..K-1")
        nu = self.nu[perm]
        return SpParafacParams(
            levels=self.levels.copy(),
            V=inverse_stick_breaking(nu),
            nu=nu,
            alpha=float(self.alpha),
            tau=self.tau[perm].copy(),
            active=self.active[perm].copy(),
            lam=self.lam[perm].copy(),
            baseline=self.baseline.copy(),
        )


def baseline_matrix(config: PriorConfig, dataset: Optional[CategoricalDataset] = None) -> np.ndarray:
    """(p, dmax) stack of baseline vectors under the configured mode."""
    if config.baseline_mode == "empirical" and dataset is None:
        raise ConfigError("empirical baseline mode requires a dataset")
    out = np.zeros((config.p, config.dmax))
    for j in range(1, config.p + 1):
        vec = baseline_vector(config.baseline_mode, j, dataset=dataset, levels=config.levels)
        out[j - 1, : vec.size] = vec
    return out


def draw_prior(
    config: PriorConfig,
    rng: np.random.Generator,
    dataset: Optional[CategoricalDataset] = None,
) -> SpParafacParams:
    """One draw of the full parameter state from the prior.

    Deterministic given the generator state.  ``gamma = 0`` makes every
    allocation active (the dense-mixture limit).
    """
    if dataset is not None and not np.array_equal(dataset.levels, config.levels):
        raise ConfigError("dataset levels do not match the prior configuration")
    baseline = baseline_matrix(config, dataset)
    K, p = config.K, config.p
    alpha = float(rng.gamma(config.a_alpha, 1.0 / config.b_alpha))
    V = np.ones(K)
    if K > 1:
        V[: K - 1] = rng.beta(1.0, alpha, size=K - 1)
    nu = stick_breaking(V)
    if config.gamma == 0.0:
        tau = np.ones(K)
    else:
        tau = rng.beta(1.0, config.gamma, size=K)
    active = rng.random((K, p)) < tau[:, None]
    mask = config.level_mask()
    free = _dirichlet(rng, np.broadcast_to(config.dirichlet_a, (K, p, config.dmax)), mask=mask)
    lam = np.where(active[:, :, None], free, baseline[None, :, :])
    return SpParafacParams(
        levels=config.levels.copy(),
        V=V,
        nu=nu,
        alpha=alpha,
        tau=tau,
        active=active,
        lam=lam,
        baseline=baseline,
    )
