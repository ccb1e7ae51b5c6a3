"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines live; the slower experiments (scaling slopes) dominate the runtime.
"""

import math
import time

import numpy as np
import pytest

from medoids.bandit import ArmEvaluator, SearchConfig, adaptive_search
from medoids.banditpam import fit
from medoids.core import Dataset, DistanceOracle, Metric
from medoids.exact import pam_build, pam_swap_once_fastpam1, run_pam
from medoids.harness import (
    SyntheticSpec,
    fit_algorithm,
    fit_loglog_slope,
    generate,
    run_experiment_scaling,
    subsample,
)
from oracles import brute_one_medoid, brute_total_loss, dist_matrix, random_instance

RESULTS: list[str] = []


def report(name: str, passed: bool, detail: str) -> None:
    line = f"ACCEPTANCE[{name}]: {'PASS' if passed else 'FAIL'} ({detail})"
    RESULTS.append(line)
    print("\n" + line)
    assert passed, line


def make_oracle(points, metric):
    return DistanceOracle(Dataset.from_vectors(points), Metric(metric))


# -- criterion 1: exact-solver equivalence -------------------------------------------


def test_exact_solver_equivalence():
    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(200):
        rng = np.random.default_rng([1, seed])
        points, k, metric = random_instance(rng, n_lo=10, n_hi=40, k_hi=4)
        a = run_pam(make_oracle(points, metric), k, "naive")
        b = run_pam(make_oracle(points, metric), k, "fastpam1")
        same = (
            a.medoids == b.medoids
            and a.loss == b.loss
            and [(e.kind, e.chosen, e.loss_after) for e in a.trajectory]
            == [(e.kind, e.chosen, e.loss_after) for e in b.trajectory]
        )
        mismatches += not same
    elapsed = time.perf_counter() - t0
    report(
        "exact-solver-equivalence",
        mismatches == 0 and elapsed < 10.0,
        f"200 instances, {mismatches} mismatches, {elapsed:.1f}s < 10s",
    )


# -- criterion 2: brute-force optimality of components --------------------------------


def test_brute_force_component_optimality():
    build_bad = 0
    for seed in range(100):
        rng = np.random.default_rng([2, seed])
        points, _, metric = random_instance(rng, n_lo=5, n_hi=60)
        state, _ = pam_build(make_oracle(points, metric), 1)
        build_bad += state.medoids != [brute_one_medoid(dist_matrix(points, metric))]

    worst = 0.0
    swaps_checked = 0
    for seed in range(30):
        rng = np.random.default_rng([3, seed])
        points, k, metric = random_instance(rng)
        result = run_pam(make_oracle(points, metric), k, "fastpam1")
        D = dist_matrix(points, metric)
        meds = [
            e.chosen for e in result.trajectory if e.kind == "build_add"
        ]
        current = list(meds)
        prev_loss = brute_total_loss(D, current)
        for event in result.trajectory:
            if event.kind != "swap":
                continue
            m_out, x_in = event.chosen
            current = [x_in if m == m_out else m for m in current]
            new_loss = brute_total_loss(D, current)
            # delta realized by the solver vs the independent recomputation
            realized = event.loss_after - prev_loss
            worst = max(worst, abs(realized - (new_loss - prev_loss)))
            prev_loss = event.loss_after
            swaps_checked += 1
    report(
        "brute-force-optimality",
        build_bad == 0 and worst <= 1e-9,
        f"100 builds exact ({build_bad} bad); {swaps_checked} swap deltas, "
        f"max dev {worst:.2e} <= 1e-9",
    )


# -- criterion 3: reduction identity ---------------------------------------------------


def test_reduction_identity():
    bad = 0
    for seed in range(100):
        rng = np.random.default_rng([4, seed])
        points, k, metric = random_instance(rng)
        bandit = fit(
            make_oracle(points, metric),
            k,
            SearchConfig(seed=seed, ci_multiplier=math.inf),
        )
        exact = run_pam(make_oracle(points, metric), k, "fastpam1")
        same = (
            bandit.medoids == exact.medoids
            and bandit.loss == exact.loss
            and [(e.kind, e.chosen, e.loss_after) for e in bandit.trajectory]
            == [(e.kind, e.chosen, e.loss_after) for e in exact.trajectory]
        )
        bad += not same
    report("reduction-identity", bad == 0, f"100 instances, {bad} mismatches")


# -- criterion 4: same result as the exact solver under defaults -----------------------


def test_same_result_as_pam_defaults():
    t0 = time.perf_counter()
    agree = 0
    runs = 20
    for seed in range(runs):
        data = generate(
            SyntheticSpec("gaussian_mixture", n=1000, d=2, clusters=5,
                          cluster_std=1.0, seed=seed)
        )
        exact = run_pam(DistanceOracle(data, Metric.L2), 5, "fastpam1")
        bandit = fit(DistanceOracle(data, Metric.L2), 5, SearchConfig(seed=seed))
        agree += sorted(bandit.medoids) == sorted(exact.medoids)
    elapsed = time.perf_counter() - t0
    report(
        "same-result-as-pam",
        agree >= 19 and elapsed < 300.0,
        f"{agree}/{runs} medoid sets equal (need >= 19), {elapsed:.0f}s < 300s",
    )


# -- criteria 5 and 7: scaling slopes ---------------------------------------------------

N_GRID = [500, 1000, 2000, 4000, 8000]
SCALING_SEED = 2026
SCALING_REPS = 5


@pytest.fixture(scope="module")
def gaussian_slope():
    t0 = time.perf_counter()
    _, slope = run_experiment_scaling(
        "gaussian_mixture", N_GRID, 5, "banditpam", SCALING_REPS, SCALING_SEED
    )
    return slope, time.perf_counter() - t0


def test_scaling_slopes(gaussian_slope):
    slope, gauss_elapsed = gaussian_slope
    t0 = time.perf_counter()
    _, pam_slope = run_experiment_scaling(
        "gaussian_mixture", [200, 400, 800], 3, "pam", SCALING_REPS, SCALING_SEED
    )
    elapsed = gauss_elapsed + (time.perf_counter() - t0)
    report(
        "scaling-slope",
        0.8 <= slope <= 1.3 and 1.9 <= pam_slope <= 2.1 and elapsed < 1200.0,
        f"banditpam slope {slope:.3f} in [0.8,1.3]; naive pam slope "
        f"{pam_slope:.3f} in [1.9,2.1]; {elapsed:.0f}s < 1200s",
    )


def test_heavy_tail_degradation(gaussian_slope):
    slope, _ = gaussian_slope
    _, heavy_slope = run_experiment_scaling(
        "heavy_tail_concentrated", N_GRID, 5, "banditpam", SCALING_REPS, SCALING_SEED
    )
    report(
        "heavy-tail-degradation",
        heavy_slope > slope,
        f"heavy-tail slope {heavy_slope:.3f} > gaussian slope {slope:.3f}",
    )


# -- criterion 6: exact count formulas ---------------------------------------------------


def test_exact_count_formulas():
    bad = []
    for seed in range(20):
        rng = np.random.default_rng([5, seed])
        points, k, metric = random_instance(rng, n_lo=8, n_hi=30)
        n = len(points)
        oracle = make_oracle(points, metric)
        state, _ = pam_build(oracle, k)
        build_expected = n * n + sum((n - l) * n for l in range(1, k))
        if oracle.phase_counts.get("build") != build_expected:
            bad.append((seed, "build"))
        if oracle.phase_counts.get("maintenance") != k * n:
            bad.append((seed, "maintenance"))
        if k < n:
            oracle.reset_counts()
            pam_swap_once_fastpam1(state, oracle)
            if oracle.phase_counts.get("swap") != (n - k) * n:
                bad.append((seed, "fastpam1-swap"))
            oracle.reset_counts()
            from medoids.exact import pam_swap_once_naive

            pam_swap_once_naive(state, oracle)
            if oracle.phase_counts.get("swap") != k * (n - k) * n:
                bad.append((seed, "naive-swap"))
    report("exact-count-formulas", not bad, f"20 instances, violations: {bad or 'none'}")


# -- criterion 8: theorem-1 style sample-complexity trend ---------------------------------


class _TableEvaluator(ArmEvaluator):
    base_phase = "search"

    def __init__(self, table):
        self.table = np.asarray(table, float)
        self.targets = list(range(self.table.shape[0]))
        self.ref_count = self.table.shape[1]

    def g(self, target, ref, phase):
        return float(self.table[target, ref])

    def g_batch(self, targets, refs, phase):
        return self.table[np.asarray(targets)][:, np.asarray(refs)]


def test_sample_complexity_log_trend():
    # fixed-gap arm tables: best arm at mean 0, suboptimal arms at gaps in
    # [0.5, 0.9] sigma; per-arm pulls should grow linearly in log(ref_count)
    gaps = np.linspace(0.5, 0.9, 12)
    ref_grid = [256, 512, 1024, 2048, 4096]
    xs, ys = [], []
    for refs in ref_grid:
        per_seed = []
        for seed in range(80):
            rng = np.random.default_rng([seed, refs])
            table = np.empty((len(gaps) + 1, refs))
            for row, mu in enumerate([0.0] + list(gaps)):
                noise = rng.uniform(-math.sqrt(3), math.sqrt(3), refs)
                noise -= noise.mean()
                table[row] = mu + noise
            outcome = adaptive_search(
                _TableEvaluator(table),
                SearchConfig(seed=seed, batch_size=10, delta=float(refs) ** -3.0),
            )
            per_seed.append(np.mean([s.n_sampled for s in outcome.stats[1:]]))
        xs.append(math.log(refs))
        ys.append(float(np.mean(per_seed)))
    A = np.vstack([xs, np.ones(len(xs))]).T
    coef, res, *_ = np.linalg.lstsq(A, np.asarray(ys), rcond=None)
    r2 = 1.0 - float(res[0]) / float(np.sum((np.asarray(ys) - np.mean(ys)) ** 2))
    monotone = all(b > a for a, b in zip(ys, ys[1:]))
    sublinear = all(
        y2 / r2_ < y1 / r1_
        for (y1, r1_), (y2, r2_) in zip(zip(ys, ref_grid), zip(ys[1:], ref_grid[1:]))
    )
    report(
        "theorem1-log-trend",
        r2 >= 0.9 and coef[0] > 0 and monotone and sublinear,
        f"per-arm pulls {[round(y) for y in ys]} vs log refs: R2={r2:.3f} >= 0.9, "
        f"slope {coef[0]:.1f}/ln, monotone={monotone}, sublinear={sublinear}",
    )


# -- criterion 9: loss-ratio table ----------------------------------------------------------


def test_loss_ratio_table():
    base = generate(
        SyntheticSpec("gaussian_mixture", n=160, d=2, clusters=3,
                      cluster_std=1.0, seed=99)
    )
    problems = []
    checked = matched = 0
    for n in (60, 120):
        for rep in range(5):
            rng = np.random.default_rng([6, n, rep])
            sample = subsample(base, n, rng)
            seed = int(rng.integers(0, 2**63))
            pam = fit_algorithm(sample, Metric.L2, "pam", 3, seed)
            fast = fit_algorithm(sample, Metric.L2, "fastpam1", 3, seed)
            bandit = fit_algorithm(sample, Metric.L2, "banditpam", 3, seed)
            vor = fit_algorithm(sample, Metric.L2, "voronoi", 3, seed)
            checked += 1
            if fast.loss / pam.loss != 1.0:
                problems.append((n, rep, "fastpam1", fast.loss / pam.loss))
            if sorted(bandit.medoids) == sorted(pam.medoids):
                matched += 1
                if bandit.loss / pam.loss != 1.0:
                    problems.append((n, rep, "banditpam", bandit.loss / pam.loss))
            if not vor.loss / pam.loss >= 1.0:
                problems.append((n, rep, "voronoi", vor.loss / pam.loss))
    report(
        "loss-ratio-table",
        not problems and matched >= checked - 1,
        f"{checked} fixtures: fastpam1 ratio == 1.0, banditpam ratio == 1.0 on "
        f"{matched} matching sets, voronoi >= 1.0; problems: {problems or 'none'}",
    )


# -- summary ----------------------------------------------------------------------------------


def test_zz_acceptance_summary():
    print("\n" + "=" * 72)
    for line in RESULTS:
        print(line)
    print("=" * 72)
    assert all(": PASS" in line for line in RESULTS)
