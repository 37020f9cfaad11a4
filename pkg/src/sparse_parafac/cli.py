"""Command-line entry points.

Five subcommands cover the full workflow: ``simulate`` writes synthetic
datasets with their exact truths, ``fit`` runs the Gibbs sampler and
serializes draws, ``summarize`` turns draw files into dependence matrices
and coefficient reports, ``prior-sim`` studies the induced shrinkage
prior, and ``replicate`` runs whole simulate/fit/summarize pipelines in
parallel and aggregates power, type-I error, and coverage.

Exit codes: 0 success, 2 configuration error, 3 data or I/O error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .errors import ConfigError, DataError, NumericalError
from .gibbs import GibbsConfig, run_chain
from .harness import FitSettings, run_replicates
from .inference import (
    canonical_subsets,
    coefficient_samples,
    cramers_v_matrix,
    cramers_v_matrix_empirical,
    replicate_aggregate,
    summarize_values,
)
from .priors import PriorConfig, baseline_matrix
from .priorsim import induced_coefficient_samples, main_effect_l1_samples
from .simgen import generate, true_coefficients, true_cramers_v
from .tensor import cell_prob, marginal_tensor


def _merged(args, config: dict, key: str, default=None):
    """Flag value if given, else config-file value, else default."""
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    return config.get(key, default)


def _load_command_config(args, allowed) -> dict:
    config = io.load_config(args.config) if args.config else {}
    io.check_keys(config, allowed, "config")
    return config


def _out_dir(args) -> Path:
    if not args.out:
        raise ConfigError("--out is required")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _var_labels(p: int):
    return [f"v{j}" for j in range(1, p + 1)]


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

_FIT_KEYS = [
    "data", "seed", "iterations", "burn_in", "thin", "K", "gamma",
    "baseline_mode", "levels", "a_alpha", "b_alpha", "keep_z",
]


def cmd_fit(args) -> int:
    config = _load_command_config(args, _FIT_KEYS)
    data_path = _merged(args, config, "data")
    if not data_path:
        raise ConfigError("fit needs a dataset (--data or config key 'data')")
    out = _out_dir(args)
    declared = config.get("levels")
    dataset, label_maps, columns = io.parse_dataset_csv(data_path, declared_levels=declared)
    prior = PriorConfig(
        levels=dataset.levels,
        K=int(_merged(args, config, "K", 20)),
        gamma=_merged(args, config, "gamma"),
        a_alpha=float(config.get("a_alpha", 1.0)),
        b_alpha=float(config.get("b_alpha", 1.0)),
        baseline_mode=_merged(args, config, "baseline_mode", "uniform"),
    )
    gibbs = GibbsConfig(
        prior=prior,
        iterations=int(_merged(args, config, "iterations", 25000)),
        burn_in=int(_merged(args, config, "burn_in", 10000)),
        thin=int(_merged(args, config, "thin", 5)),
        seed=int(_merged(args, config, "seed", 0)),
        keep_z=bool(config.get("keep_z", True)),
    )
    samples = run_chain(dataset, gibbs)
    baseline = baseline_matrix(prior, dataset)
    meta = {
        "command": "fit",
        "data": str(data_path),
        "columns": columns,
        "levels": dataset.levels.tolist(),
        "baseline_mode": prior.baseline_mode,
        "baseline": [baseline[j, : dataset.levels[j]].tolist() for j in range(dataset.p)],
        "K": prior.K,
        "gamma": prior.gamma,
        "a_alpha": prior.a_alpha,
        "b_alpha": prior.b_alpha,
        **samples.meta,
    }
    io.write_run(out, samples, meta)
    if label_maps:
        io.write_json(out / io.LABELS_FILE, label_maps)
    print(f"fit: retained {len(samples)} draws -> {out}")
    return 0


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------

_SUMMARIZE_KEYS = ["draws", "data", "cramers_v", "beta", "cells", "marginals", "bins"]


def cmd_summarize(args) -> int:
    config = _load_command_config(args, _SUMMARIZE_KEYS)
    draws_dir = _merged(args, config, "draws")
    if not draws_dir:
        raise ConfigError("summarize needs a fit directory (--draws or config key 'draws')")
    out = _out_dir(args)
    bins = int(_merged(args, config, "bins", 50))
    samples, meta = io.read_run(draws_dir)
    if len(samples) < 2:
        raise DataError(f"{draws_dir}: need at least 2 retained draws")
    p = len(meta["levels"])
    labels = meta.get("columns") or _var_labels(p)

    want_cv = _merged(args, config, "cramers_v", False)
    beta_requests = [io.parse_subset(s) for s in (_merged(args, config, "beta", []) or [])]
    cell_requests = [list(map(int, c)) for c in config.get("cells", [])]
    marginal_requests = [io.parse_subset(s) for s in config.get("marginals", [])]
    if not (want_cv or beta_requests or cell_requests or marginal_requests):
        raise ConfigError("nothing requested: pass --cramers-v, --beta, cells, or marginals")
    for subset in beta_requests + marginal_requests:
        if subset[-1] > p:
            raise ConfigError(f"request references variable {subset[-1]} but p={p}")

    if want_cv:
        stack = np.stack([cramers_v_matrix(draw) for draw in samples.draws])
        io.write_matrix_csv(out / "cramers_v_mean.csv", stack.mean(axis=0), labels)
        io.write_matrix_csv(out / "cramers_v_q025.csv", np.quantile(stack, 0.025, axis=0), labels)
        io.write_matrix_csv(out / "cramers_v_q975.csv", np.quantile(stack, 0.975, axis=0), labels)
        data_path = _merged(args, config, "data")
        if data_path:
            declared = [int(d) for d in meta["levels"]]
            dataset, _, _ = io.parse_dataset_csv(data_path, declared_levels=declared)
            io.write_matrix_csv(
                out / "cramers_v_empirical.csv", cramers_v_matrix_empirical(dataset), labels
            )

    results = {"seed": meta.get("seed"), "n_draws": len(samples), "beta": [], "cells": [], "marginals": []}
    for subset in beta_requests:
        for s, values in coefficient_samples(samples, subset).items():
            report = summarize_values(values, bins=bins)
            key = io.subset_key(s)
            results["beta"].append({"coefficient": key, **report.to_dict()})
            io.write_histogram_csv(
                out / f"hist_beta_{key.replace(',', '_')}.csv",
                report.hist_edges,
                report.hist_counts,
            )
    for cell in cell_requests:
        values = np.array([cell_prob(draw, cell) for draw in samples.draws])
        results["cells"].append(
            {"cell": list(cell), **summarize_values(values, bins=bins).to_dict()}
        )
    for subset in marginal_requests:
        margs = np.stack([marginal_tensor(draw, subset).cells for draw in samples.draws])
        results["marginals"].append(
            {
                "variables": list(subset),
                "mean": margs.mean(axis=0).tolist(),
                "q025": np.quantile(margs, 0.025, axis=0).tolist(),
                "q975": np.quantile(margs, 0.975, axis=0).tolist(),
            }
        )
    io.write_json(out / "summary.json", results)
    print(f"summarize: wrote reports for {len(samples)} draws -> {out}")
    return 0


# ---------------------------------------------------------------------------
# prior-sim
# ---------------------------------------------------------------------------

_PRIOR_SIM_KEYS = ["p", "d", "K", "gamma", "draws", "seed", "report", "bins"]


def cmd_prior_sim(args) -> int:
    config = _load_command_config(args, _PRIOR_SIM_KEYS)
    out = _out_dir(args)
    p = int(_merged(args, config, "p", 3))
    d = int(_merged(args, config, "d", 2))
    n_draws = int(_merged(args, config, "draws", 10000))
    seed = int(_merged(args, config, "seed", 0))
    bins = int(_merged(args, config, "bins", 50))
    prior = PriorConfig(
        levels=[d] * p,
        K=int(_merged(args, config, "K", 20)),
        gamma=_merged(args, config, "gamma"),
    )
    report_kind = _merged(args, config, "report", "coefficients" if p <= 10 else "main-l1")
    meta = {
        "command": "prior-sim",
        "p": p,
        "d": d,
        "K": prior.K,
        "gamma": prior.gamma,
        "draws": n_draws,
        "seed": seed,
        "report": report_kind,
    }
    t0 = time.perf_counter()
    if report_kind == "coefficients":
        samples = induced_coefficient_samples(prior, n_draws, seed=seed)
        rows = []
        for subset, values in samples.items():
            rep = summarize_values(values, bins=bins)
            key = io.subset_key(subset)
            rows.append(
                {
                    "coefficient": key,
                    "mean": rep.mean,
                    "std": rep.std,
                    "min": rep.min,
                    "max": rep.max,
                    "skewness": rep.skewness,
                    "kurtosis": rep.kurtosis,
                }
            )
            io.write_histogram_csv(
                out / f"hist_beta_{key.replace(',', '_')}.csv", rep.hist_edges, rep.hist_counts
            )
        with (out / "prior_summary.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["coefficient", "mean", "std", "min", "max", "skewness", "kurtosis"]
            )
            writer.writeheader()
            writer.writerows(rows)
    elif report_kind == "main-l1":
        values = main_effect_l1_samples(prior, n_draws, seed=seed)
        rep = summarize_values(values, bins=bins)
        io.write_histogram_csv(out / "hist_main_effect_l1.csv", rep.hist_edges, rep.hist_counts)
        io.write_json(out / "prior_summary.json", {"main_effect_l1": rep.to_dict()})
    else:
        raise ConfigError(f"unknown report kind {report_kind!r}")
    meta["wall_time_s"] = time.perf_counter() - t0
    io.write_json(out / io.META_FILE, meta)
    print(f"prior-sim: {n_draws} draws ({report_kind}) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

_SIMULATE_KEYS = ["scenario", "columns"]


def cmd_simulate(args) -> int:
    config = _load_command_config(args, _SIMULATE_KEYS)
    if "scenario" not in config:
        raise ConfigError("simulate needs a 'scenario' object in the config file")
    out = _out_dir(args)
    spec = io.scenario_from_config(config["scenario"], seed=args.seed)
    dataset = generate(spec)
    columns = config.get("columns") or _var_labels(spec.p)
    io.write_dataset_csv(out / "dataset.csv", dataset, columns)
    truth = {
        "seed": spec.seed,
        "kind": spec.kind,
        "n": spec.n,
        "p": spec.p,
        "d": spec.d,
        "active_set": list(spec.active_set),
        "cramers_v": {f"{a},{b}": v for (a, b), v in true_cramers_v(spec).items()},
    }
    if spec.kind == "loglinear":
        truth["coefficients"] = {
            io.subset_key(s): b for s, b in true_coefficients(spec).items()
        }
    io.write_json(out / "truth.json", truth)
    print(f"simulate: {spec.kind} dataset ({spec.n} x {spec.p}) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# replicate
# ---------------------------------------------------------------------------

_REPLICATE_KEYS = ["replicates", "scenario", "fit", "beta_subsets", "seed"]
_REPLICATE_FIT_KEYS = [
    "iterations", "burn_in", "thin", "K", "gamma", "baseline_mode", "a_alpha", "b_alpha",
]


def cmd_replicate(args) -> int:
    config = _load_command_config(args, _REPLICATE_KEYS)
    for key in ("replicates", "scenario"):
        if key not in config:
            raise ConfigError(f"replicate needs config key {key!r}")
    out = _out_dir(args)
    spec = io.scenario_from_config(config["scenario"])
    fit_config = dict(config.get("fit", {}))
    io.check_keys(fit_config, _REPLICATE_FIT_KEYS, "fit")
    settings = FitSettings(**fit_config)
    subsets = [io.parse_subset(s) for s in config.get("beta_subsets", [list(spec.active_set)])]
    base_seed = int(_merged(args, config, "seed", 0))
    threads = args.threads or 1
    replicates = int(config["replicates"])

    reports, failures = run_replicates(
        spec, settings, subsets, replicates, base_seed=base_seed, threads=threads
    )
    if not reports:
        raise NumericalError("every replicate failed; nothing to aggregate")
    truths = {}
    exact = true_coefficients(spec) if spec.kind == "loglinear" else {}
    for subset in subsets:
        for s in canonical_subsets(subset):
            truths[s] = float(exact.get(s, 0.0))
    rows = replicate_aggregate(reports, truths)

    with (out / "power_typeI_coverage.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["coefficient", "truth", "n_replicates", "power", "type_i_error", "coverage"],
        )
        writer.writeheader()
        writer.writerows(rows)
    meta = {
        "command": "replicate",
        "replicates": replicates,
        "completed": len(reports),
        "seed": base_seed,
        "threads": threads,
        "scenario": config["scenario"],
        "fit": fit_config,
        "beta_subsets": [list(s) for s in subsets],
    }
    io.write_json(out / io.META_FILE, meta)
    if failures:
        io.write_json(out / "failures.json", {str(k): v for k, v in failures.items()})
    print(f"replicate: aggregated {len(reports)}/{replicates} replicates -> {out}")
    return 0


# ---------------------------------------------------------------------------
# parser / main
# ---------------------------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--seed", type=int, help="base RNG seed")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--threads", type=int, help="worker processes for replicate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparse-parafac",
        description="Bayesian sparse-PARAFAC factorization of categorical tables",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    fit = subs.add_parser("fit", help="run the Gibbs sampler on a CSV dataset")
    _add_common(fit)
    fit.add_argument("--data", help="dataset CSV")
    fit.add_argument("--iterations", type=int)
    fit.add_argument("--burn-in", dest="burn_in", type=int)
    fit.add_argument("--thin", type=int)
    fit.add_argument("--k", dest="K", type=int, help="truncation level")
    fit.add_argument("--gamma", type=float, help="sparsity penalty")
    fit.add_argument("--baseline-mode", dest="baseline_mode", choices=["uniform", "empirical"])
    fit.set_defaults(func=cmd_fit)

    summarize = subs.add_parser("summarize", help="summaries from a fit directory")
    _add_common(summarize)
    summarize.add_argument("--draws", help="fit output directory")
    summarize.add_argument("--data", help="dataset CSV for the empirical comparison")
    summarize.add_argument(
        "--cramers-v", dest="cramers_v", action="store_const", const=True,
        help="emit the posterior Cramer's V matrix",
    )
    summarize.add_argument(
        "--beta", action="append", help="binary variable subset like 2,4,12,14 (repeatable)"
    )
    summarize.add_argument("--bins", type=int)
    summarize.set_defaults(func=cmd_summarize)

    prior_sim = subs.add_parser("prior-sim", help="simulate the induced shrinkage prior")
    _add_common(prior_sim)
    prior_sim.add_argument("--p", type=int)
    prior_sim.add_argument("--d", type=int)
    prior_sim.add_argument("--k", dest="K", type=int)
    prior_sim.add_argument("--gamma", type=float)
    prior_sim.add_argument("--draws", type=int)
    prior_sim.add_argument("--report", choices=["coefficients", "main-l1"])
    prior_sim.add_argument("--bins", type=int)
    prior_sim.set_defaults(func=cmd_prior_sim)

    simulate = subs.add_parser("simulate", help="write a synthetic dataset and its truths")
    _add_common(simulate)
    simulate.set_defaults(func=cmd_simulate)

    replicate = subs.add_parser("replicate", help="simulate/fit/summarize across replicates")
    _add_common(replicate)
    replicate.set_defaults(func=cmd_replicate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
