"""Prior simulation of the induced log-linear shrinkage.

Draws parameter states from the prior and maps each induced probability
tensor into its log-linear coefficients: the full coefficient vector for
small binary tables, or the l1 norm of the main effects for large p
(each main effect computed from its univariate marginal, which matches
the full-tensor coefficient whenever the other variables sit on the
baseline).
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .inference import canonical_subsets
from .priors import PriorConfig, draw_prior
from .tensor import full_tensor

#: cells are clipped here before taking logs; a prior tensor only reaches
#: zero through gamma-draw underflow in every component at once
_LOG_FLOOR = 1e-300


def _yates_log_tensor(arr: np.ndarray) -> np.ndarray:
    out = np.log(np.maximum(arr, _LOG_FLOOR))
    for axis in range(out.ndim):
        ref = np.take(out, 0, axis=axis)
        act = np.take(out, 1, axis=axis)
        out = np.stack([ref, act - ref], axis=axis)
    return out


def induced_coefficient_samples(
    config: PriorConfig, n_draws: int, seed: int = 0
) -> Dict[Tuple[int, ...], np.ndarray]:
    """Samples of every log-linear coefficient under the prior.

    Requires binary variables and a small enough p to enumerate the
    table.  Returns arrays of length ``n_draws`` keyed by subset.
    """
    if np.any(config.levels != 2):
        raise ConfigError("coefficient extraction requires binary variables")
    if config.p > 16:
        raise ConfigError("full coefficient extraction is limited to p <= 16")
    rng = np.random.default_rng(seed)
    subsets = canonical_subsets(range(1, config.p + 1))
    out = {s: np.empty(n_draws) for s in subsets}
    for t in range(n_draws):
        arr = full_tensor(draw_prior(config, rng)).as_array()
        effects = _yates_log_tensor(arr)
        for s in subsets:
            idx = tuple(1 if (axis + 1) in s else 0 for axis in range(config.p))
            out[s][t] = effects[idx]
    return out


def main_effect_l1_samples(config: PriorConfig, n_draws: int, seed: int = 0) -> np.ndarray:
    """Samples of sum_j |beta_j| under the prior, one per draw.

    Each main effect is the log odds of its univariate marginal; binary
    variables only.
    """
    if np.any(config.levels != 2):
        raise ConfigError("main-effect extraction requires binary variables")
    rng = np.random.default_rng(seed)
    out = np.empty(n_draws)
    for t in range(n_draws):
        params = draw_prior(config, rng)
        marg = np.einsum("h,hjc->jc", params.nu, params.lam)
        beta = np.log(np.maximum(marg[:, 1], _LOG_FLOOR)) - np.log(
            np.maximum(marg[:, 0], _LOG_FLOOR)
        )
        out[t] = float(np.abs(beta).sum())
    return out
