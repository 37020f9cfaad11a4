"""Shared model-building helpers for the test suite."""

import numpy as np
import pytest

from sparse_parafac.priors import SpParafacParams, inverse_stick_breaking


def build_model(levels, nu, active_lambdas=None, baseline=None):
    """Hand-built model state.

    ``active_lambdas`` maps (h, j) pairs (1-based) to probability vectors;
    every other slot sits on the baseline (uniform unless given).
    """
    levels = np.asarray(levels, dtype=np.int64)
    nu = np.asarray(nu, dtype=np.float64)
    K, p, dmax = nu.size, levels.size, int(levels.max())
    if baseline is None:
        baseline = np.zeros((p, dmax))
        for j in range(p):
            baseline[j, : levels[j]] = 1.0 / levels[j]
    else:
        baseline = np.asarray(baseline, dtype=np.float64)
    active = np.zeros((K, p), dtype=bool)
    lam = np.tile(baseline, (K, 1, 1))
    for (h, j), vec in (active_lambdas or {}).items():
        vec = np.asarray(vec, dtype=np.float64)
        lam[h - 1, j - 1, : vec.size] = vec
        active[h - 1, j - 1] = True
    return SpParafacParams(
        levels=levels,
        V=inverse_stick_breaking(nu),
        nu=nu,
        alpha=1.0,
        tau=np.full(K, 0.5),
        active=active,
        lam=lam,
        baseline=baseline,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
