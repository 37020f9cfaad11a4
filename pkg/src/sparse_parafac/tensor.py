"""Value types for probability vectors/tensors and exact operations on
sparse-PARAFAC mixture models.

Conventions used across the whole package:

* variable positions are 1-based (j = 1..p), matching data files;
* category codes are 1-based (c = 1..d_j); code 0 marks a missing entry;
* flat tensor storage orders cells with the FIRST axis fastest.

All types are plain immutable-by-convention values; operations are pure
functions and safe for concurrent reads.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DataError, SizeError

if TYPE_CHECKING:  # pragma: no cover
    from .priors import SpParafacParams

#: absolute tolerance for a probability vector summing to one
SIMPLEX_ATOL = 1e-10
#: absolute tolerance for a dense tensor summing to one
TENSOR_ATOL = 1e-9
#: default cap on the number of dense cells that may be enumerated
DEFAULT_CELL_CAP = 2 ** 24
#: sentinel code for a missing entry in a categorical table
MISSING = 0


def check_simplex(probs, *, atol: float = SIMPLEX_ATOL, name: str = "probability vector") -> np.ndarray:
    """Validate a probability vector (entries >= 0, sums to 1) and return it
    as a float64 array."""
    v = np.asarray(probs, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-d vector")
    if np.any(v < 0.0) or not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has negative or non-finite entries")
    total = float(np.sum(v))
    if abs(total - 1.0) > atol:
        raise ValueError(f"{name} sums to {total!r}, not 1 within {atol}")
    return v


@dataclass(eq=False)
class CategoricalDataset:
    """An n x p table of category codes.

    ``values[i, j]`` holds the code of subject i on variable j+1, in
    ``1..levels[j]``; ``0`` marks a missing entry.
    """

    values: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int64)
        self.levels = np.asarray(self.levels, dtype=np.int64)
        if self.values.ndim != 2 or self.values.shape[1] == 0:
            raise DataError("values must be an n x p table with p >= 1")
        if self.levels.shape != (self.values.shape[1],):
            raise DataError("levels must give one entry per variable")
        if np.any(self.levels < 2):
            bad = int(np.argmax(self.levels < 2)) + 1
            raise DataError(f"variable {bad} has fewer than 2 levels")
        if np.any(self.values < 0) or np.any(self.values > self.levels[None, :]):
            i, j = np.argwhere((self.values < 0) | (self.values > self.levels[None, :]))[0]
            raise DataError(
                f"code {self.values[i, j]} out of range 1..{self.levels[j]} "
                f"at row {i + 1}, variable {j + 1}"
            )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column(self, j: int) -> np.ndarray:
        """Codes of variable j (1-based), missing entries included as 0."""
        if not 1 <= j <= self.p:
            raise ValueError(f"variable index {j} out of range 1..{self.p}")
        return self.values[:, j - 1]


@dataclass(eq=False)
class DenseProbTensor:
    """Explicit probability array over all cells of a small table.

    ``cells`` is flat with the first axis fastest: the cell (c_1, ..., c_p)
    lives at index (c_1 - 1) + d_1 (c_2 - 1) + d_1 d_2 (c_3 - 1) + ...
    """

    dims: tuple
    cells: np.ndarray
    cap: InitVar[int] = DEFAULT_CELL_CAP

    def __post_init__(self, cap):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) == 0 or any(d < 1 for d in self.dims):
            raise ValueError("dims must be a nonempty tuple of positive sizes")
        ncells = math.prod(self.dims)
        if ncells > cap:
            raise SizeError(f"{ncells} cells exceed the cap of {cap}")
        self.cells = np.asarray(self.cells, dtype=np.float64).ravel()
        if self.cells.size != ncells:
            raise ValueError(f"expected {ncells} cells, got {self.cells.size}")
        if np.any(self.cells < 0.0) or not np.all(np.isfinite(self.cells)):
            raise ValueError("cells must be finite and nonnegative")
        total = float(np.sum(self.cells))
        if abs(total - 1.0) > TENSOR_ATOL:
            raise ValueError(f"cells sum to {total!r}, not 1 within {TENSOR_ATOL}")

    @classmethod
    def from_array(cls, arr: np.ndarray, cap: int = DEFAULT_CELL_CAP) -> "DenseProbTensor":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr.shape, arr.ravel(order="F"), cap=cap)

    def as_array(self) -> np.ndarray:
        """The tensor as a p-dimensional array, axis j indexing variable j+1."""
        return self.cells.reshape(self.dims, order="F")

    def cell(self, coords: Sequence[int]) -> float:
        """Probability of one cell, addressed by 1-based category codes."""
        coords = np.asarray(coords, dtype=np.int64)
        if coords.shape != (len(self.dims),):
            raise ValueError("need one coordinate per axis")
        if np.any(coords < 1) or np.any(coords > np.asarray(self.dims)):
            raise ValueError(f"coordinates {coords.tolist()} out of range for dims {self.dims}")
        flat = np.ravel_multi_index(tuple(coords - 1), self.dims, order="F")
        return float(self.cells[flat])


def l1_distance(a: DenseProbTensor, b: DenseProbTensor) -> float:
    """L1 distance between two tensors on the same cell grid."""
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    return float(np.abs(a.cells - b.cells).sum())


def _check_model_cell(model: "SpParafacParams", cell) -> np.ndarray:
    cell = np.asarray(cell, dtype=np.int64)
    if cell.shape != (model.p,):
        raise ValueError(f"cell must have one coordinate per variable (p={model.p})")
    if np.any(cell < 1) or np.any(cell > model.levels):
        raise ValueError(f"cell {cell.tolist()} out of range for levels {model.levels.tolist()}")
    return cell


def cell_prob(model: "SpParafacParams", cell) -> float:
    """Probability of one cell under a sparse-PARAFAC model.

    Evaluated in log space per mixture component and combined by
    log-sum-exp; ``cell`` is a sequence of 1-based category codes.
    """
    cell = _check_model_cell(model, cell)
    vals = model.lam[:, np.arange(model.p), cell - 1]  # (K, p); baseline already in place
    with np.errstate(divide="ignore"):
        comp = np.log(vals).sum(axis=1) + np.log(model.nu)
    return float(np.exp(logsumexp(comp)))


def full_tensor(model: "SpParafacParams", *, cap: int = DEFAULT_CELL_CAP) -> DenseProbTensor:
    """The full probability tensor of a model, as a sum of rank-one terms."""
    dims = tuple(int(d) for d in model.levels)
    ncells = math.prod(dims)
    if ncells > cap:
        raise SizeError(f"full tensor has {ncells} cells, exceeding the cap of {cap}")
    arr = np.zeros(dims)
    for h in range(model.K):
        comp = np.asarray(model.nu[h])
        for j, d in enumerate(dims):
            comp = np.multiply.outer(comp, model.lam[h, j, :d])
        arr += comp
    return DenseProbTensor.from_array(arr, cap=cap)


def marginal_tensor(model: "SpParafacParams", subset, *, cap: int = DEFAULT_CELL_CAP) -> DenseProbTensor:
    """Marginal probability tensor over a subset of variables.

    Valid by dropping the factors of all other variables (each sums to 1).
    ``subset`` lists 1-based variable positions; the result's axes follow
    the order given.
    """
    subset = [int(j) for j in subset]
    if len(subset) == 0:
        raise ValueError("subset must be nonempty")
    if len(set(subset)) != len(subset):
        raise ValueError("subset contains repeated variables")
    if any(j < 1 or j > model.p for j in subset):
        raise ValueError(f"subset {subset} out of range 1..{model.p}")
    dims = tuple(int(model.levels[j - 1]) for j in subset)
    ncells = math.prod(dims)
    if ncells > cap:
        raise SizeError(f"marginal tensor has {ncells} cells, exceeding the cap of {cap}")
    arr = np.zeros(dims)
    for h in range(model.K):
        comp = np.asarray(model.nu[h])
        for j, d in zip(subset, dims):
            comp = np.multiply.outer(comp, model.lam[h, j - 1, :d])
        arr += comp
    return DenseProbTensor.from_array(arr, cap=cap)


def pairwise_marginal(model: "SpParafacParams", j: int, j2: int) -> np.ndarray:
    """Joint probability matrix of variables j and j2 (1-based, distinct)."""
    if j == j2:
        raise ValueError("pairwise marginal needs two distinct variables")
    for v in (j, j2):
        if not 1 <= v <= model.p:
            raise ValueError(f"variable index {v} out of range 1..{model.p}")
    d1 = int(model.levels[j - 1])
    d2 = int(model.levels[j2 - 1])
    return np.einsum(
        "h,hc,he->ce", model.nu, model.lam[:, j - 1, :d1], model.lam[:, j2 - 1, :d2]
    )
