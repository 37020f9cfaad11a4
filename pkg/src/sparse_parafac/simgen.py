"""Synthetic data generators for the three replication scenarios.

Each scenario makes the variables in an active set ``S*`` dependent while
every other variable is independent discrete-uniform:

* ``loglinear`` draws the S* block jointly from an exactly enumerated
  binary log-linear distribution;
* ``subpop`` mixes per-component product distributions over S*;
* ``glm`` generates the S* variables sequentially through a
  multinomial-logit link on the previously generated ones (a triangular
  scheme, which pins down a well-defined joint).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ConfigError, SizeError
from .inference import canonical_subsets, cramers_v_from_joint, tensor_from_loglinear
from .tensor import CategoricalDataset, DenseProbTensor

SCENARIO_KINDS = ("loglinear", "subpop", "glm")

#: largest active set that may be enumerated exactly (2^16 cells)
MAX_LOGLINEAR_ACTIVE = 16


@dataclass(eq=False)
class ScenarioSpec:
    """One synthetic-data scenario.

    ``active_set`` lists 1-based variable positions; coefficient subsets
    must stay inside it.  Fields beyond the chosen ``kind`` are ignored.
    """

    kind: str
    n: int
    p: int
    d: int
    active_set: Tuple[int, ...]
    seed: int = 0
    coefficients: Optional[Dict[Tuple[int, ...], float]] = None    # loglinear
    component_weights: Optional[np.ndarray] = None                 # subpop
    component_table: Optional[np.ndarray] = None                   # subpop (m, q, d)
    glm_intercepts: Optional[np.ndarray] = None                    # glm (q, d-1)
    glm_weights: Optional[np.ndarray] = None                       # glm (q, q, d-1, d-1)

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"kind must be one of {SCENARIO_KINDS}, got {self.kind!r}")
        if self.n < 1 or self.p < 1 or self.d < 2:
            raise ConfigError("need n >= 1, p >= 1, d >= 2")
        self.active_set = tuple(sorted(int(v) for v in self.active_set))
        if len(set(self.active_set)) != len(self.active_set) or not self.active_set:
            raise ConfigError("active_set must be a nonempty set of distinct positions")
        if self.active_set[0] < 1 or self.active_set[-1] > self.p:
            raise ConfigError(f"active_set {self.active_set} out of range 1..{self.p}")
        if self.kind == "loglinear":
            if self.d != 2:
                raise ConfigError("the loglinear scenario requires binary variables")
            if len(self.active_set) > MAX_LOGLINEAR_ACTIVE:
                raise SizeError(
                    f"active set of {len(self.active_set)} variables is too large to enumerate"
                )
            if not self.coefficients:
                raise ConfigError("the loglinear scenario needs coefficients")
            self.coefficients = {
                tuple(sorted(int(v) for v in s)): float(b) for s, b in self.coefficients.items()
            }
            for s in self.coefficients:
                if not set(s) <= set(self.active_set):
                    raise ConfigError(f"coefficient subset {s} leaves the active set")
        elif self.kind == "subpop":
            q = len(self.active_set)
            if self.component_weights is None or self.component_table is None:
                self.component_weights, self.component_table = default_subpop_components(q, self.d)
            self.component_weights = np.asarray(self.component_weights, dtype=np.float64)
            self.component_table = np.asarray(self.component_table, dtype=np.float64)
            m = self.component_weights.size
            if self.component_table.shape != (m, q, self.d):
                raise ConfigError(
                    f"component table must have shape {(m, q, self.d)}, "
                    f"got {self.component_table.shape}"
                )
            if np.any(self.component_weights < 0) or abs(self.component_weights.sum() - 1.0) > 1e-9:
                raise ConfigError("component weights must be a probability vector")
            sums = self.component_table.sum(axis=2)
            if np.any(self.component_table < 0) or np.any(np.abs(sums - 1.0) > 1e-9):
                raise ConfigError("every component row must be a probability vector")
        else:
            if self.d != 4:
                raise ConfigError("the glm scenario uses 4-level variables")
            q = len(self.active_set)
            if self.glm_intercepts is None:
                self.glm_intercepts = np.zeros((q, self.d - 1))
            if self.glm_weights is None:
                self.glm_weights = default_glm_weights(q, self.d)
            self.glm_intercepts = np.asarray(self.glm_intercepts, dtype=np.float64)
            self.glm_weights = np.asarray(self.glm_weights, dtype=np.float64)
            if self.glm_intercepts.shape != (q, self.d - 1):
                raise ConfigError(f"glm intercepts must have shape {(q, self.d - 1)}")
            if self.glm_weights.shape != (q, q, self.d - 1, self.d - 1):
                raise ConfigError(
                    f"glm weights must have shape {(q, q, self.d - 1, self.d - 1)}"
                )

    @property
    def q(self) -> int:
        return len(self.active_set)


def default_subpop_components(q: int, d: int, sharpness: float = 0.8) -> Tuple[np.ndarray, np.ndarray]:
    """Two equally weighted components pushed toward opposite corners:
    component 1 favors the lowest category, component 2 the highest."""
    rest = (1.0 - sharpness) / (d - 1)
    low = np.full(d, rest)
    low[0] = sharpness
    high = np.full(d, rest)
    high[-1] = sharpness
    table = np.stack([np.tile(low, (q, 1)), np.tile(high, (q, 1))])
    return np.array([0.5, 0.5]), table


def default_glm_weights(q: int, d: int, strength: float = 1.5) -> np.ndarray:
    """Chain coupling: each active variable pulls its successor toward the
    same category with the given log-odds strength."""
    w = np.zeros((q, q, d - 1, d - 1))
    for t in range(1, q):
        w[t, t - 1] = strength * np.eye(d - 1)
    return w


def _sample_rows(prob_rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical code (1-based) per row of probabilities."""
    cdf = np.cumsum(prob_rows, axis=1)
    u = rng.random(prob_rows.shape[0]) * cdf[:, -1]
    return 1 + np.minimum((u[:, None] > cdf).sum(axis=1), prob_rows.shape[1] - 1)


def _uniform_fill(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    values = rng.integers(1, spec.d + 1, size=(spec.n, spec.p))
    return values


def gen_loglinear(spec: ScenarioSpec, rng: Optional[np.random.Generator] = None) -> CategoricalDataset:
    """Binary table whose active block follows the exact log-linear joint."""
    if spec.kind != "loglinear":
        raise ConfigError(f"expected a loglinear spec, got kind={spec.kind!r}")
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    values = _uniform_fill(spec, rng)
    block = loglinear_active_tensor(spec)
    flat = rng.choice(block.cells.size, size=spec.n, p=block.cells)
    codes = np.unravel_index(flat, block.dims, order="F")
    for axis, j in enumerate(spec.active_set):
        values[:, j - 1] = codes[axis] + 1
    return CategoricalDataset(values, np.full(spec.p, spec.d))


def gen_subpop(spec: ScenarioSpec, rng: Optional[np.random.Generator] = None) -> CategoricalDataset:
    """Mixture of product distributions over the active set."""
    if spec.kind != "subpop":
        raise ConfigError(f"expected a subpop spec, got kind={spec.kind!r}")
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    values = _uniform_fill(spec, rng)
    comp = rng.choice(spec.component_weights.size, size=spec.n, p=spec.component_weights)
    for axis, j in enumerate(spec.active_set):
        values[:, j - 1] = _sample_rows(spec.component_table[comp, axis], rng)
    return CategoricalDataset(values, np.full(spec.p, spec.d))


def _glm_probs(spec: ScenarioSpec, t: int, previous: np.ndarray) -> np.ndarray:
    """Multinomial-logit category probabilities of the t-th active variable
    given the codes of the earlier active variables (n, t)."""
    n = previous.shape[0]
    eta = np.tile(spec.glm_intercepts[t], (n, 1))        # (n, d-1), category 1 is reference
    for s in range(t):
        dummies = previous[:, s] - 2                      # -1 for the reference category
        hit = dummies >= 0
        eta[hit] += spec.glm_weights[t, s].T[dummies[hit]]
    expo = np.exp(eta - eta.max(axis=1, keepdims=True))
    ref = np.exp(-eta.max(axis=1, keepdims=True))
    probs = np.concatenate([ref, expo], axis=1)
    return probs / probs.sum(axis=1, keepdims=True)


def gen_glm(spec: ScenarioSpec, rng: Optional[np.random.Generator] = None) -> CategoricalDataset:
    """Sequential multinomial-logit generation over the active set."""
    if spec.kind != "glm":
        raise ConfigError(f"expected a glm spec, got kind={spec.kind!r}")
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    values = _uniform_fill(spec, rng)
    previous = np.empty((spec.n, 0), dtype=np.int64)
    for t, j in enumerate(spec.active_set):
        probs = _glm_probs(spec, t, previous)
        col = _sample_rows(probs, rng)
        values[:, j - 1] = col
        previous = np.column_stack([previous, col])
    return CategoricalDataset(values, np.full(spec.p, spec.d))


def generate(spec: ScenarioSpec, rng: Optional[np.random.Generator] = None) -> CategoricalDataset:
    """Dispatch on the scenario kind."""
    return {"loglinear": gen_loglinear, "subpop": gen_subpop, "glm": gen_glm}[spec.kind](spec, rng)


# ---------------------------------------------------------------------------
# Exact truths implied by a scenario
# ---------------------------------------------------------------------------

def loglinear_active_tensor(spec: ScenarioSpec) -> DenseProbTensor:
    """Exactly enumerated joint distribution of the active block.

    Zero main effects are added for unreferenced active variables so the
    block always spans the whole active set.
    """
    coeffs = {(v,): 0.0 for v in spec.active_set}
    coeffs.update(spec.coefficients)
    return tensor_from_loglinear(coeffs)


def active_joint_tensor(spec: ScenarioSpec) -> DenseProbTensor:
    """The true joint distribution of the active-set variables."""
    if spec.kind == "loglinear":
        return loglinear_active_tensor(spec)
    if spec.kind == "subpop":
        q = spec.q
        arr = np.zeros((spec.d,) * q)
        for m, w in enumerate(spec.component_weights):
            comp = np.asarray(w)
            for axis in range(q):
                comp = np.multiply.outer(comp, spec.component_table[m, axis])
            arr += comp
        return DenseProbTensor.from_array(arr)
    # glm: chain-rule product over every cell of the active block
    q = spec.q
    arr = np.ones((spec.d,) * q)
    for t in range(q):
        if t:
            grid = np.indices((spec.d,) * t).reshape(t, -1).T + 1   # (d^t, t)
        else:
            grid = np.empty((1, 0), dtype=np.int64)
        probs = _glm_probs(spec, t, grid)                     # (d^t, d)
        arr *= probs.reshape((spec.d,) * t + (spec.d,) + (1,) * (q - t - 1))
    return DenseProbTensor.from_array(arr)


def true_coefficients(spec: ScenarioSpec) -> Dict[Tuple[int, ...], float]:
    """True log-linear coefficients over the active set (zero-filled for
    subsets without an explicit coefficient).  Binary scenarios only."""
    if spec.kind != "loglinear":
        raise ConfigError("exact coefficients are defined for the loglinear scenario")
    return {s: spec.coefficients.get(s, 0.0) for s in canonical_subsets(spec.active_set)}


def true_cramers_v(spec: ScenarioSpec) -> Dict[Tuple[int, int], float]:
    """Exact Cramer's V for every pair inside the active set."""
    joint = active_joint_tensor(spec).as_array()
    out: Dict[Tuple[int, int], float] = {}
    q = spec.q
    for a in range(q):
        for b in range(a + 1, q):
            keep = tuple(ax for ax in range(q) if ax not in (a, b))
            pair = joint.sum(axis=keep) if keep else joint
            key = (spec.active_set[a], spec.active_set[b])
            out[key] = cramers_v_from_joint(pair)
    return out
