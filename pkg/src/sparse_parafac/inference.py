"""Posterior and empirical functionals: dependence measures, log-linear
coefficients, and summaries across draws and replicates.

Log-linear work is restricted to binary variables: dataset code 1 is the
reference level and code 2 the active level, so the coefficient of a
subset S is the alternating subset sum (Moebius inversion) of log cell
probabilities over the corner cells of S.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DataError, NumericalError
from .gibbs import PosteriorSampleSet
from .priors import SpParafacParams
from .tensor import DenseProbTensor, CategoricalDataset, marginal_tensor, pairwise_marginal

Subset = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Cramer's V
# ---------------------------------------------------------------------------

def cramers_v_from_joint(joint: np.ndarray, drop_empty: bool = False) -> float:
    """Cramer's V of a joint probability (or frequency) matrix.

    ``drop_empty`` removes categories with zero marginal mass from both
    the sum and the size penalty, as needed for plug-in estimates.
    """
    joint = np.asarray(joint, dtype=np.float64)
    total = joint.sum()
    if total <= 0.0:
        raise DataError("joint table has no mass")
    joint = joint / total
    row = joint.sum(axis=1)
    col = joint.sum(axis=0)
    if drop_empty:
        joint = joint[row > 0.0][:, col > 0.0]
        row = row[row > 0.0]
        col = col[col > 0.0]
    elif np.any(row == 0.0) or np.any(col == 0.0):
        raise NumericalError("a marginal category has zero probability")
    denom = min(joint.shape) - 1
    if denom == 0:
        return 0.0
    indep = np.outer(row, col)
    chi2 = float(((joint - indep) ** 2 / indep).sum())
    return float(np.sqrt(min(1.0, chi2 / denom)))


def cramers_v_model(model: SpParafacParams, j: int, j2: int) -> float:
    """Cramer's V between variables j and j2 implied by a model."""
    return cramers_v_from_joint(pairwise_marginal(model, j, j2))


def cramers_v_empirical(dataset: CategoricalDataset, j: int, j2: int) -> float:
    """Plug-in Cramer's V over the jointly observed rows of two variables."""
    if j == j2:
        raise ValueError("need two distinct variables")
    a = dataset.column(j)
    b = dataset.column(j2)
    keep = (a > 0) & (b > 0)
    if not np.any(keep):
        raise DataError(f"variables {j} and {j2} have no jointly observed rows")
    d1 = int(dataset.levels[j - 1])
    d2 = int(dataset.levels[j2 - 1])
    table = np.bincount((a[keep] - 1) * d2 + (b[keep] - 1), minlength=d1 * d2).reshape(d1, d2)
    return cramers_v_from_joint(table, drop_empty=True)


def cramers_v_matrix(model: SpParafacParams) -> np.ndarray:
    """All pairwise Cramer's V values of a model; symmetric, unit diagonal.

    Assumes strictly positive univariate marginals (guaranteed for sampler
    draws, whose baselines are floored away from zero).
    """
    p, dmax = model.p, model.dmax
    mask = model.level_mask()
    marg = np.einsum("h,hjc->jc", model.nu, model.lam)             # (p, dmax)
    joint = np.einsum("h,hjc,hke->jkce", model.nu, model.lam, model.lam)
    indep = marg[:, None, :, None] * marg[None, :, None, :]
    pair_mask = mask[:, None, :, None] & mask[None, :, None, :]
    num = np.where(pair_mask, (joint - indep) ** 2, 0.0)
    chi2 = (num / np.where(pair_mask, np.where(indep > 0, indep, 1.0), 1.0)).sum(axis=(2, 3))
    denom = np.minimum(model.levels[:, None], model.levels[None, :]) - 1
    out = np.sqrt(np.minimum(1.0, chi2 / denom))
    np.fill_diagonal(out, 1.0)
    return out


def cramers_v_matrix_empirical(dataset: CategoricalDataset) -> np.ndarray:
    """Plug-in Cramer's V for every variable pair of a dataset."""
    p = dataset.p
    out = np.eye(p)
    for j in range(1, p + 1):
        for j2 in range(j + 1, p + 1):
            v = cramers_v_empirical(dataset, j, j2)
            out[j - 1, j2 - 1] = out[j2 - 1, j - 1] = v
    return out


# ---------------------------------------------------------------------------
# Log-linear parameterization (binary variables)
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class LogLinearCoeffs:
    """Coefficients of the saturated log-linear parameterization of a
    binary tensor over ``variables`` (sorted 1-based positions).

    ``coeffs`` maps every nonempty sorted subset of ``variables`` to its
    coefficient; the empty-set term is kept separately as the reference
    log-probability and excluded from inference outputs.
    """

    variables: Tuple[int, ...]
    coeffs: Dict[Subset, float]
    log_reference: float

    def vector(self) -> np.ndarray:
        """Coefficients in canonical subset order (by size, then position)."""
        return np.array([self.coeffs[s] for s in canonical_subsets(self.variables)])


def canonical_subsets(variables: Sequence[int]) -> List[Subset]:
    """All nonempty subsets of ``variables``, ordered by size then position."""
    variables = tuple(sorted(variables))
    out: List[Subset] = []
    for size in range(1, len(variables) + 1):
        out.extend(combinations(variables, size))
    return out


def _yates(values: np.ndarray) -> np.ndarray:
    """Corner-difference transform along every axis of a (2, ..., 2) array.

    Output entry at a 0/1 multi-index b equals the alternating subset sum
    of ``values`` over the corners below b; axis by axis this is just
    (reference, active - reference).
    """
    out = values
    for axis in range(values.ndim):
        ref = np.take(out, 0, axis=axis)
        act = np.take(out, 1, axis=axis)
        out = np.stack([ref, act - ref], axis=axis)
    return out


def _yates_inverse(effects: np.ndarray) -> np.ndarray:
    out = effects
    for axis in range(effects.ndim):
        ref = np.take(out, 0, axis=axis)
        dlt = np.take(out, 1, axis=axis)
        out = np.stack([ref, ref + dlt], axis=axis)
    return out


def loglinear_from_tensor(t: DenseProbTensor, variables: Optional[Sequence[int]] = None) -> LogLinearCoeffs:
    """Log-linear coefficients of a strictly positive binary tensor.

    ``variables`` names the tensor's axes (defaults to 1..q); the
    coefficient of S is the Moebius sum of log cell probabilities over
    the corner cells of S, which inverts ``tensor_from_loglinear``.
    """
    if any(d != 2 for d in t.dims):
        raise ValueError("log-linear extraction requires binary variables")
    arr = t.as_array()
    if np.any(arr <= 0.0):
        raise ValueError("log-linear extraction requires strictly positive cells")
    q = len(t.dims)
    if variables is None:
        variables = tuple(range(1, q + 1))
    variables = tuple(int(v) for v in variables)
    if len(variables) != q or sorted(set(variables)) != sorted(variables):
        raise ValueError("variables must name each axis once")
    order = np.argsort(variables)
    arr = np.transpose(arr, order)
    names = tuple(variables[i] for i in order)
    effects = _yates(np.log(arr))
    coeffs: Dict[Subset, float] = {}
    for idx in np.ndindex(effects.shape):
        subset = tuple(names[axis] for axis, bit in enumerate(idx) if bit)
        if subset:
            coeffs[subset] = float(effects[idx])
    return LogLinearCoeffs(variables=names, coeffs=coeffs, log_reference=float(effects[(0,) * q]))


def tensor_from_loglinear(
    coeffs: Dict[Subset, float] | LogLinearCoeffs,
    p: Optional[int] = None,
    *,
    cap: int = 2 ** 24,
) -> DenseProbTensor:
    """Normalized binary tensor whose log-linear coefficients are ``coeffs``.

    With ``p=None`` the tensor spans only the support variables (the union
    of all subsets).  Given ``p``, the remaining variables enter as
    independent uniform axes, which is exact because they carry no
    coefficient.
    """
    if isinstance(coeffs, LogLinearCoeffs):
        support = coeffs.variables
        table = coeffs.coeffs
    else:
        table = {tuple(sorted(int(v) for v in s)): float(b) for s, b in coeffs.items() if len(s)}
        if len(table) != len(coeffs):
            raise ValueError("coefficient subsets must be nonempty and distinct")
        support = tuple(sorted({v for s in table for v in s}))
        if support and support[0] < 1:
            raise ValueError("variable positions must be >= 1")
    if p is not None and support and support[-1] > p:
        raise ValueError(f"coefficients reference variable {support[-1]} beyond p={p}")
    q = len(support)
    if q == 0:
        raise ValueError("need at least one coefficient")
    pos = {v: i for i, v in enumerate(support)}
    effects = np.zeros((2,) * q)
    for subset, beta in table.items():
        idx = [0] * q
        for v in subset:
            idx[pos[v]] = 1
        effects[tuple(idx)] = beta
    predictor = _yates_inverse(effects)
    cells = np.exp(predictor - predictor.max())
    cells /= cells.sum()
    if p is None:
        return DenseProbTensor.from_array(cells, cap=cap)
    full_dims = [2] * p
    shape = [1] * p
    for v in support:
        shape[v - 1] = 2
    arr = np.broadcast_to(cells.reshape(shape), full_dims) / (2.0 ** (p - q))
    return DenseProbTensor.from_array(arr, cap=cap)


# ---------------------------------------------------------------------------
# Posterior summaries
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SummaryReport:
    """Moments, quantiles, extremes, and a histogram of one functional."""

    n: int
    mean: float
    std: float
    q025: float
    q500: float
    q975: float
    min: float
    max: float
    skewness: float
    kurtosis: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "std": self.std,
            "q025": self.q025,
            "q500": self.q500,
            "q975": self.q975,
            "min": self.min,
            "max": self.max,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "hist_edges": np.asarray(self.hist_edges).tolist(),
            "hist_counts": np.asarray(self.hist_counts).tolist(),
        }


def summarize_values(values: np.ndarray, bins: int = 50) -> SummaryReport:
    """Summary statistics of a sample; kurtosis is the plain (non-excess)
    fourth standardized moment."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least 2 values to summarize")
    mean = float(x.mean())
    std = float(x.std(ddof=1))
    centered = x - mean
    if std > 0.0:
        skew = float((centered ** 3).mean() / (centered ** 2).mean() ** 1.5)
        kurt = float((centered ** 4).mean() / (centered ** 2).mean() ** 2)
    else:
        skew = float("nan")
        kurt = float("nan")
    q025, q500, q975 = (float(q) for q in np.quantile(x, [0.025, 0.5, 0.975]))
    counts, edges = np.histogram(x, bins=bins)
    return SummaryReport(
        n=int(x.size),
        mean=mean,
        std=std,
        q025=q025,
        q500=q500,
        q975=q975,
        min=float(x.min()),
        max=float(x.max()),
        skewness=skew,
        kurtosis=kurt,
        hist_edges=edges,
        hist_counts=counts,
    )


def posterior_functional_summary(
    samples: PosteriorSampleSet,
    functional: Callable[[SpParafacParams], float],
    bins: int = 50,
) -> SummaryReport:
    """Apply a scalar functional to every retained draw and summarize."""
    if len(samples) < 2:
        raise ValueError("need at least 2 retained draws")
    values = np.empty(len(samples))
    for i, draw in enumerate(samples.draws):
        try:
            values[i] = functional(draw)
        except Exception as exc:
            exc.args = (f"functional failed on draw {i + 1}: {exc}",)
            raise
    return summarize_values(values, bins=bins)


def coefficient_samples(samples: PosteriorSampleSet, subset: Sequence[int]) -> Dict[Subset, np.ndarray]:
    """Per-draw log-linear coefficients for every nonempty S within a
    binary variable subset, computed on the subset's marginal tensor."""
    subset = tuple(sorted(int(v) for v in subset))
    keys = canonical_subsets(subset)
    out = {s: np.empty(len(samples)) for s in keys}
    for i, draw in enumerate(samples.draws):
        marg = marginal_tensor(draw, subset)
        coeffs = loglinear_from_tensor(marg, variables=subset)
        for s in keys:
            out[s][i] = coeffs.coeffs[s]
    return out


def summarize_coefficients(
    samples: PosteriorSampleSet, subset: Sequence[int], bins: int = 50
) -> Dict[Subset, SummaryReport]:
    """SummaryReport per coefficient over a binary variable subset."""
    return {
        s: summarize_values(v, bins=bins)
        for s, v in coefficient_samples(samples, subset).items()
    }


def significance_decision(report: SummaryReport) -> bool:
    """True when the central 95% interval excludes zero (closed interval:
    zero on the boundary is not significant)."""
    return report.q025 > 0.0 or report.q975 < 0.0


def replicate_aggregate(
    reports: Sequence[Dict[Subset, SummaryReport]],
    truths: Dict[Subset, float],
) -> List[dict]:
    """Power / type-I error / coverage per coefficient across replicates.

    Power is the significance rate where the truth is nonzero, type-I
    error the significance rate where it is zero; coverage counts how
    often the closed 95% interval contains the truth.
    """
    if len(reports) == 0:
        raise ValueError("need at least one replicate")
    rows = []
    for key, truth in truths.items():
        reps = [r[key] for r in reports if key in r]
        if not reps:
            continue
        sig = [significance_decision(r) for r in reps]
        cover = [r.q025 <= truth <= r.q975 for r in reps]
        rate = float(np.mean(sig))
        rows.append(
            {
                "coefficient": ",".join(str(v) for v in key),
                "truth": float(truth),
                "n_replicates": len(reps),
                "power": rate if truth != 0.0 else float("nan"),
                "type_i_error": rate if truth == 0.0 else float("nan"),
                "coverage": float(np.mean(cover)),
            }
        )
    return rows
