"""File formats: dataset CSV ingestion, JSON-lines draw serialization,
matrix/histogram CSVs, and config handling.

Every artifact written here can be read back by the library (the formats
are self-consumable), and every artifact embeds the seed(s) that produced
it through the run metadata.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DataError
from .gibbs import PosteriorSampleSet
from .priors import SpParafacParams, stick_breaking
from .simgen import ScenarioSpec
from .tensor import CategoricalDataset

DRAWS_FILE = "draws.jsonl"
META_FILE = "meta.json"
TRACE_FILE = "trace.csv"
LABELS_FILE = "labels.json"


# ---------------------------------------------------------------------------
# dataset CSV
# ---------------------------------------------------------------------------

def parse_dataset_csv(
    path, declared_levels: Optional[Sequence[int]] = None
) -> Tuple[CategoricalDataset, Dict[str, Dict[str, int]], List[str]]:
    """Read a categorical table from CSV.

    The first row is a mandatory header.  Cells are positive integer
    codes, arbitrary labels, or empty (missing).  A column where every
    non-missing cell parses as an integer keeps those codes; any other
    column maps labels to codes 1..d in first-appearance order.  Returns
    the dataset, the label-to-code dictionaries of the label columns, and
    the column names.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(header) == 0 or all(not c.strip() for c in header):
            raise DataError(f"{path}: header row has no columns")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}"
                )
            rows.append([c.strip() for c in row])
    if not rows:
        raise DataError(f"{path}: no data rows")
    p = len(header)
    n = len(rows)
    if declared_levels is not None and len(declared_levels) != p:
        raise ConfigError(f"declared levels list {len(declared_levels)} columns, file has {p}")
    values = np.zeros((n, p), dtype=np.int64)
    label_maps: Dict[str, Dict[str, int]] = {}
    for j in range(p):
        cells = [row[j] for row in rows]
        present = [(i, c) for i, c in enumerate(cells) if c != ""]
        integer_coded = True
        for _, c in present:
            try:
                int(c)
            except ValueError:
                integer_coded = False
                break
        if integer_coded:
            for i, c in present:
                code = int(c)
                if code < 1:
                    raise DataError(
                        f"{path}: non-positive code {code} at row {i + 2}, column {header[j]!r}"
                    )
                values[i, j] = code
        else:
            mapping: Dict[str, int] = {}
            for i, c in present:
                if c not in mapping:
                    mapping[c] = len(mapping) + 1
                values[i, j] = mapping[c]
            label_maps[header[j]] = mapping
    observed_levels = values.max(axis=0)
    if declared_levels is not None:
        levels = np.asarray(declared_levels, dtype=np.int64)
        if np.any(levels < observed_levels):
            j = int(np.argmax(levels < observed_levels))
            raise DataError(
                f"{path}: column {header[j]!r} has codes beyond the declared {levels[j]} levels"
            )
    else:
        levels = observed_levels
        if np.any(levels < 2):
            j = int(np.argmax(levels < 2))
            raise DataError(
                f"{path}: column {header[j]!r} shows fewer than 2 levels; "
                "declare its level count in the config"
            )
    return CategoricalDataset(values=values, levels=levels), label_maps, list(header)


def write_dataset_csv(path, dataset: CategoricalDataset, columns: Optional[Sequence[str]] = None) -> None:
    """Write a dataset as integer codes with empty cells for missing."""
    if columns is None:
        columns = [f"v{j}" for j in range(1, dataset.p + 1)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in dataset.values:
            writer.writerow(["" if c == 0 else int(c) for c in row])


# ---------------------------------------------------------------------------
# draws
# ---------------------------------------------------------------------------

def draw_to_json(params: SpParafacParams) -> dict:
    """Sparse JSON form of one draw: only active component vectors are
    stored, keyed by their 1-based (component, variable) pair."""
    active_pairs = np.argwhere(params.active)
    return {
        "V": params.V.tolist(),
        "tau": params.tau.tolist(),
        "alpha": float(params.alpha),
        "active": [[int(h) + 1, int(j) + 1] for h, j in active_pairs],
        "lam": [
            [int(h) + 1, int(j) + 1, params.lam[h, j, : params.levels[j]].tolist()]
            for h, j in active_pairs
        ],
    }


def draw_from_json(record: dict, levels: np.ndarray, baseline: np.ndarray) -> SpParafacParams:
    V = np.asarray(record["V"], dtype=np.float64)
    K = V.size
    p = levels.size
    dmax = int(levels.max())
    active = np.zeros((K, p), dtype=bool)
    lam = np.tile(baseline, (K, 1, 1))
    for h, j in record["active"]:
        active[h - 1, j - 1] = True
    for h, j, probs in record["lam"]:
        lam[h - 1, j - 1, : len(probs)] = probs
    return SpParafacParams(
        levels=levels.copy(),
        V=V,
        nu=stick_breaking(V),
        alpha=float(record["alpha"]),
        tau=np.asarray(record["tau"], dtype=np.float64),
        active=active,
        lam=lam,
        baseline=baseline.copy(),
    )


def write_run(out_dir, samples: PosteriorSampleSet, meta: dict) -> None:
    """Write draws.jsonl, meta.json, and the scalar trace CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / DRAWS_FILE).open("w", encoding="utf-8") as fh:
        for draw in samples.draws:
            fh.write(json.dumps(draw_to_json(draw)) + "\n")
    write_json(out_dir / META_FILE, meta)
    with (out_dir / TRACE_FILE).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["draw", "alpha", "occupied_components", "active_flags"])
        for i, draw in enumerate(samples.draws, start=1):
            occupied = (
                len(np.unique(samples.z_draws[i - 1])) if samples.z_draws is not None else ""
            )
            writer.writerow([i, repr(float(draw.alpha)), occupied, int(draw.active.sum())])


def read_run(out_dir) -> Tuple[PosteriorSampleSet, dict]:
    """Read a fit directory back into a sample set plus its metadata."""
    out_dir = Path(out_dir)
    meta = json.loads((out_dir / META_FILE).read_text(encoding="utf-8"))
    levels = np.asarray(meta["levels"], dtype=np.int64)
    dmax = int(levels.max())
    baseline = np.zeros((levels.size, dmax))
    for j, vec in enumerate(meta["baseline"]):
        baseline[j, : len(vec)] = vec
    draws = []
    with (out_dir / DRAWS_FILE).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                draws.append(draw_from_json(json.loads(line), levels, baseline))
    return PosteriorSampleSet(draws=draws, meta=meta), meta


# ---------------------------------------------------------------------------
# matrices, histograms, generic JSON
# ---------------------------------------------------------------------------

def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def write_matrix_csv(path, matrix: np.ndarray, labels: Sequence[str]) -> None:
    matrix = np.asarray(matrix)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + list(labels))
        for name, row in zip(labels, matrix):
            writer.writerow([name] + [f"{x:.17g}" for x in row])


def read_matrix_csv(path) -> Tuple[np.ndarray, List[str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        labels = next(reader)[1:]
        rows = [[float(x) for x in row[1:]] for row in reader]
    return np.asarray(rows), labels


def write_histogram_csv(path, edges: np.ndarray, counts: np.ndarray) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for left, right, count in zip(edges[:-1], edges[1:], counts):
            writer.writerow([f"{left:.17g}", f"{right:.17g}", int(count)])


def read_histogram_csv(path) -> Tuple[np.ndarray, np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = list(reader)
    edges = np.array([float(r[0]) for r in rows] + [float(rows[-1][1])])
    counts = np.array([int(r[2]) for r in rows])
    return edges, counts


# ---------------------------------------------------------------------------
# configs
# ---------------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return payload


def check_keys(config: dict, allowed: Sequence[str], where: str) -> None:
    unknown = sorted(set(config) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {where} keys: {', '.join(unknown)}")


def subset_key(subset: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in subset)


def parse_subset(text) -> Tuple[int, ...]:
    """A coefficient subset written as '2,4,12'."""
    if isinstance(text, (list, tuple)):
        parts = [int(v) for v in text]
    else:
        parts = [int(tok) for tok in str(text).replace(" ", "").split(",") if tok]
    if not parts or len(set(parts)) != len(parts) or min(parts) < 1:
        raise ConfigError(f"bad variable subset {text!r}")
    return tuple(sorted(parts))


def scenario_from_config(config: dict, seed: Optional[int] = None) -> ScenarioSpec:
    """Build a ScenarioSpec from its JSON form."""
    allowed = [
        "kind", "n", "p", "d", "active_set", "seed", "coefficients",
        "component_weights", "component_table", "glm_intercepts", "glm_weights",
    ]
    check_keys(config, allowed, "scenario")
    for key in ("kind", "n", "p", "d", "active_set"):
        if key not in config:
            raise ConfigError(f"scenario is missing {key!r}")
    coeffs = None
    if config.get("coefficients") is not None:
        coeffs = {parse_subset(s): float(b) for s, b in config["coefficients"].items()}
    arr = lambda key: None if config.get(key) is None else np.asarray(config[key], dtype=np.float64)
    return ScenarioSpec(
        kind=config["kind"],
        n=int(config["n"]),
        p=int(config["p"]),
        d=int(config["d"]),
        active_set=parse_subset(config["active_set"]),
        seed=int(config.get("seed", 0)) if seed is None else int(seed),
        coefficients=coeffs,
        component_weights=arr("component_weights"),
        component_table=arr("component_table"),
        glm_intercepts=arr("glm_intercepts"),
        glm_weights=arr("glm_weights"),
    )
