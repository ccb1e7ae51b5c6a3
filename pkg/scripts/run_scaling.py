#!/usr/bin/env python3
"""Desk-scale reproduction of the distance-call scaling experiment.

Runs the adaptive solver and naive PAM over synthetic grids, writes the
records as CSV, and prints the fitted log-log slopes. The adaptive solver
should come out near-linear; PAM near-quadratic.
"""

import argparse
import time

from medoids.harness import emit, run_experiment_scaling


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2026)
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--out-prefix", default="scaling")
    parser.add_argument("--gen", default="gaussian_mixture",
                        choices=["gaussian_mixture", "heavy_tail_concentrated"])
    args = parser.parse_args()

    t0 = time.perf_counter()
    records, slope = run_experiment_scaling(
        args.gen, [500, 1000, 2000, 4000, 8000], 5, "banditpam",
        args.reps, args.seed,
    )
    emit(records, "csv", f"{args.out_prefix}_banditpam.csv")
    print(f"banditpam {args.gen}: slope={slope:.3f} ({time.perf_counter()-t0:.0f}s)")

    t0 = time.perf_counter()
    records, slope = run_experiment_scaling(
        "gaussian_mixture", [200, 400, 800], 3, "pam", args.reps, args.seed,
    )
    emit(records, "csv", f"{args.out_prefix}_pam.csv")
    print(f"naive pam: slope={slope:.3f} ({time.perf_counter()-t0:.0f}s)")


if __name__ == "__main__":
    main()
