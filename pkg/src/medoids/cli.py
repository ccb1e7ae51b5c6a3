"""Command-line harness.

Exit codes: 0 success, 2 argument errors (bad flags or metric/data pairing),
1 runtime errors (malformed data files, I/O, solver failures).
"""

from __future__ import annotations

import json
import sys
import time

import click
import numpy as np

from . import __version__
from .bandit import SearchConfig
from .core import ConfigError, Dataset, DistanceOracle, Metric
from .harness import (
    ALGORITHMS,
    fit_algorithm,
    load_trees,
    load_vectors_csv,
    run_experiment_loss_ratio,
    run_experiment_scaling,
    emit,
)

_METRICS = {
    "l1": Metric.L1,
    "l2": Metric.L2,
    "cosine": Metric.COSINE,
    "tree-edit": Metric.TREE_EDIT,
}


def _load(path: str, fmt: str) -> Dataset:
    return load_vectors_csv(path) if fmt == "csv" else load_trees(path)


def _parse_grid(text: str) -> list[int]:
    try:
        grid = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"bad n grid {text!r}")
    if not grid:
        raise click.BadParameter("empty n grid")
    return grid


@click.group()
@click.version_option(version=__version__, prog_name="medoids")
def main() -> None:
    """k-medoids clustering with exact PAM, FastPAM1, and adaptive solvers."""


@main.command("fit")
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--format", "data_format", type=click.Choice(["csv", "trees"]), default="csv")
@click.option("--metric", type=click.Choice(sorted(_METRICS)), default="l2")
@click.option("--k", required=True, type=click.IntRange(min=1))
@click.option("--algo", type=click.Choice(ALGORITHMS), default="banditpam")
@click.option("--seed", type=int, default=0)
@click.option("--batch-size", type=click.IntRange(min=1), default=100)
@click.option("--delta", type=float, default=None)
@click.option("--ci-mult", type=float, default=1.0, help="confidence multiplier; inf disables elimination")
@click.option("--max-swaps", type=click.IntRange(min=0), default=100)
@click.option("--verify-swaps", type=click.Choice(["on", "off"]), default="on")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--out-format", type=click.Choice(["csv", "json"]), default="json")
def fit_command(
    data_path, data_format, metric, k, algo, seed, batch_size, delta,
    ci_mult, max_swaps, verify_swaps, out_path, out_format,
) -> None:
    """Cluster one dataset and write the fit summary."""
    try:
        dataset = _load(data_path, data_format)
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc))
    try:
        config = SearchConfig(
            batch_size=batch_size, delta=delta, ci_multiplier=ci_mult,
            seed=seed, verify_swaps=verify_swaps == "on",
        )
        t0 = time.perf_counter()
        result = fit_algorithm(
            dataset, _METRICS[metric], algo, k, seed, config, max_swaps
        )
        elapsed_ms = (time.perf_counter() - t0) * 1e3
    except ConfigError as exc:
        raise click.UsageError(str(exc))
    except ValueError as exc:
        raise click.ClickException(str(exc))

    payload = {
        "algorithm": algo,
        "metric": metric,
        "n": dataset.n,
        "k": k,
        "seed": seed,
        "medoid_indices": [int(m) for m in result.medoids],
        "labels": [int(a) for a in result.assignments],
        "loss": result.loss,
        "swap_count": result.swap_count,
        "distance_evals": result.total_distance_evals,
        "distance_evals_by_phase": dict(sorted(result.distance_evals.items())),
        "version": __version__,
        "wall_time_ms": elapsed_ms,
    }
    _write_fit(payload, out_format, out_path)
    click.echo(
        f"fit: n={dataset.n} k={k} algo={algo} loss={result.loss!r} "
        f"swaps={result.swap_count} evals={result.total_distance_evals}"
    )


def _write_fit(payload: dict, fmt: str, path: str) -> None:
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        return
    # one-row CSV; list fields joined with ';'
    import csv as _csv

    flat = dict(payload)
    flat["medoid_indices"] = ";".join(str(v) for v in payload["medoid_indices"])
    flat["labels"] = ";".join(str(v) for v in payload["labels"])
    flat["distance_evals_by_phase"] = ";".join(
        f"{k}={v}" for k, v in payload["distance_evals_by_phase"].items()
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(list(flat))
        writer.writerow([flat[c] for c in flat])


@main.command("bench-scaling")
@click.option("--gen", type=click.Choice(["gaussian", "heavytail"]), default="gaussian")
@click.option("--n-grid", required=True)
@click.option("--k", required=True, type=click.IntRange(min=1))
@click.option("--algo", type=click.Choice(ALGORITHMS), default="banditpam")
@click.option("--metric", type=click.Choice(["l1", "l2", "cosine"]), default="l2")
@click.option("--reps", type=click.IntRange(min=1), default=5)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--out-format", type=click.Choice(["csv", "json"]), default="csv")
def bench_scaling(gen, n_grid, k, algo, metric, reps, seed, out_path, out_format) -> None:
    """Distance-evaluations-per-iteration scaling over an n grid."""
    grid = _parse_grid(n_grid)
    if len(grid) < 3:
        raise click.BadParameter("n grid needs at least 3 values")
    kind = "gaussian_mixture" if gen == "gaussian" else "heavy_tail_concentrated"
    try:
        records, slope = run_experiment_scaling(
            kind, grid, k, algo, reps, seed, metric=_METRICS[metric]
        )
        emit(records, out_format, out_path)
    except ConfigError as exc:
        raise click.UsageError(str(exc))
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"slope={slope!r}")


@main.command("compare-loss")
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--format", "data_format", type=click.Choice(["csv", "trees"]), default="csv")
@click.option("--metric", type=click.Choice(sorted(_METRICS)), default="l2")
@click.option("--n-grid", required=True)
@click.option("--k", required=True, type=click.IntRange(min=1))
@click.option("--algos", default=",".join(ALGORITHMS))
@click.option("--reps", type=click.IntRange(min=1), default=3)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--out-format", type=click.Choice(["csv", "json"]), default="csv")
def compare_loss(
    data_path, data_format, metric, n_grid, k, algos, reps, seed, out_path, out_format
) -> None:
    """Loss relative to PAM for each algorithm over subsampled n values."""
    grid = _parse_grid(n_grid)
    algorithms = [a.strip() for a in algos.split(",") if a.strip()]
    for a in algorithms:
        if a not in ALGORITHMS:
            raise click.BadParameter(f"unknown algorithm {a!r}")
    try:
        dataset = _load(data_path, data_format)
        records = run_experiment_loss_ratio(
            dataset, _METRICS[metric], grid, k, algorithms, reps, seed
        )
        emit(records, out_format, out_path)
    except ConfigError as exc:
        raise click.UsageError(str(exc))
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {len(records)} records to {out_path}")


if __name__ == "__main__":
    sys.exit(main())
