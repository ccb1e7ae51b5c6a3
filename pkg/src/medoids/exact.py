"""Deterministic reference solvers: naive PAM, the FastPAM1-accelerated SWAP
(identical output, O(k) fewer evaluations per scan), and the Voronoi-iteration
baseline.

Tie-breaking is fixed everywhere: smallest candidate index for BUILD, smallest
(medoid order position, candidate index) pair for SWAP. Swap acceptance is a
strict loss decrease with zero tolerance.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .core import (
    ClusterState,
    DistanceOracle,
    FitResult,
    TrajectoryEvent,
    apply_add,
    apply_swap,
    assignments_with_tie_break,
    init_state,
)

__all__ = [
    "build_delta_total",
    "swap_delta_totals",
    "pam_build",
    "pam_swap_once_naive",
    "pam_swap_once_fastpam1",
    "run_pam",
    "voronoi_iteration",
]


# ---------------------------------------------------------------------------
# delta kernels
#
# Shared by the exact scans and by the bandit solver's exact-evaluation paths,
# so that both routes produce bit-identical totals and therefore identical
# argmin/tie-break decisions.
# ---------------------------------------------------------------------------


def build_delta_total(row: np.ndarray, d1: np.ndarray) -> float:
    """Total loss change from adding the candidate whose distance row is given."""
    return float(np.minimum(row - d1, 0.0).sum())


def swap_delta_totals(
    row: np.ndarray,
    d1: np.ndarray,
    d2: np.ndarray,
    nearest: np.ndarray,
    medoid_ids: Sequence[int],
) -> np.ndarray:
    """Loss change of swapping each medoid in medoid_ids for one candidate x.

    row is d(x, .) over all points. Uses the cached d1/d2 decomposition: a
    reference outside C_m contributes min(d1, d(x,.)) - d1, one inside C_m
    contributes min(d2, d(x,.)) - d1; only the C_m correction depends on m.
    """
    a = np.minimum(row, d1) - d1
    b = np.minimum(row, d2) - d1
    base = a.sum()
    diff = b - a
    return np.array([float(base + diff[nearest == m].sum()) for m in medoid_ids])


# ---------------------------------------------------------------------------
# PAM
# ---------------------------------------------------------------------------


def pam_build(
    oracle: DistanceOracle, k: int
) -> tuple[ClusterState, list[TrajectoryEvent]]:
    """Greedy BUILD of k medoids.

    Step l scans every candidate against all n references ((n-l)*n counted
    evaluations under phase "build"), then spends n maintenance evaluations
    updating the caches. The first medoid minimizes the summed distance to all
    points; later steps minimize the clamped loss change. Ties go to the
    smallest candidate index.
    """
    n = oracle.dataset.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    state: Optional[ClusterState] = None
    trajectory: list[TrajectoryEvent] = []
    for l in range(k):
        chosen = -1
        best = np.inf
        if l == 0:
            for x in range(n):
                row = oracle.distances(x, None, "build")
                total = float(row.sum())
                if total < best:
                    best, chosen = total, x
            state = init_state(oracle, [chosen])
        else:
            in_set = set(state.medoids)
            for x in range(n):
                if x in in_set:
                    continue
                row = oracle.distances(x, None, "build")
                delta = build_delta_total(row, state.d1)
                if delta < best:
                    best, chosen = delta, x
            state = apply_add(state, oracle, chosen)
        trajectory.append(
            TrajectoryEvent("build_add", chosen, state.loss, oracle.eval_count)
        )
    assert state is not None
    return state, trajectory


def pam_swap_once_naive(
    state: ClusterState, oracle: DistanceOracle
) -> Optional[tuple[int, int]]:
    """Best-improvement scan over all k(n-k) medoid/non-medoid pairs.

    Evaluates one distance row per pair (k(n-k)*n evaluations, phase "swap")
    and scores the pair's post-swap loss in loss-change form through the same
    kernel the FastPAM1 scan uses, so that a mathematically tied pair rounds
    identically on both routes. Returns the (m_out, x_in) pair iff the change
    is strictly negative, else None. Does not mutate state.
    """
    n = oracle.dataset.n
    in_set = set(state.medoids)
    best_key: Optional[tuple[float, int, int]] = None
    best_pair: Optional[tuple[int, int]] = None
    for pos, m in enumerate(state.medoids):
        for x in range(n):
            if x in in_set:
                continue
            row = oracle.distances(x, None, "swap")
            delta = float(
                swap_delta_totals(row, state.d1, state.d2, state.nearest, [m])[0]
            )
            key = (delta, pos, x)
            if best_key is None or key < best_key:
                best_key, best_pair = key, (m, x)
    if best_key is None or not best_key[0] < 0.0:
        return None
    return best_pair


def pam_swap_once_fastpam1(
    state: ClusterState, oracle: DistanceOracle
) -> Optional[tuple[int, int]]:
    """FastPAM1 scan: one distance row per candidate ((n-k)*n evaluations).

    Accumulates the per-medoid loss deltas from the shared d1/d2 decomposition
    and returns the same pair (same tie-breaks) as the naive scan.
    """
    n = oracle.dataset.n
    in_set = set(state.medoids)
    best_key: Optional[tuple[float, int, int]] = None
    best_pair: Optional[tuple[int, int]] = None
    for x in range(n):
        if x in in_set:
            continue
        row = oracle.distances(x, None, "swap")
        deltas = swap_delta_totals(row, state.d1, state.d2, state.nearest, state.medoids)
        for pos, m in enumerate(state.medoids):
            key = (float(deltas[pos]), pos, x)
            if best_key is None or key < best_key:
                best_key, best_pair = key, (m, x)
    if best_key is None or not best_key[0] < 0.0:
        return None
    return best_pair


_SWAP_FNS = {
    "naive": pam_swap_once_naive,
    "fastpam1": pam_swap_once_fastpam1,
}


def diff_counts(before: dict[str, int], after: dict[str, int]) -> dict[str, int]:
    """Per-phase evaluation counts accumulated between two snapshots."""
    return {
        phase: after[phase] - before.get(phase, 0)
        for phase in after
        if after[phase] - before.get(phase, 0)
    }


def assemble_fit_result(
    state: ClusterState,
    oracle: DistanceOracle,
    trajectory: list[TrajectoryEvent],
    swap_count: int,
    counts_before: dict[str, int],
    config_echo: dict,
) -> FitResult:
    assignments = assignments_with_tie_break(state, oracle)
    return FitResult(
        medoids=list(state.medoids),
        assignments=assignments,
        loss=state.loss,
        swap_count=swap_count,
        trajectory=trajectory,
        distance_evals=diff_counts(counts_before, oracle.phase_counts),
        config_echo=config_echo,
    )


def run_pam(
    oracle: DistanceOracle,
    k: int,
    variant: str = "fastpam1",
    max_swaps: int = 100,
) -> FitResult:
    """BUILD, then best-improvement swaps until no pair improves or max_swaps."""
    if max_swaps < 0:
        raise ValueError("max_swaps must be >= 0")
    swap_fn = _SWAP_FNS[variant]
    before = oracle.phase_counts
    state, trajectory = pam_build(oracle, k)
    swaps = 0
    while swaps < max_swaps:
        choice = swap_fn(state, oracle)
        if choice is None:
            break
        state = apply_swap(state, oracle, *choice)
        swaps += 1
        trajectory.append(
            TrajectoryEvent("swap", choice, state.loss, oracle.eval_count)
        )
    echo = {"algorithm": f"pam-{variant}", "k": k, "metric": oracle.metric.value,
            "max_swaps": max_swaps, "seed": None}
    return assemble_fit_result(state, oracle, trajectory, swaps, before, echo)


# ---------------------------------------------------------------------------
# Voronoi iteration baseline
# ---------------------------------------------------------------------------


def voronoi_iteration(
    oracle: DistanceOracle,
    k: int,
    init: Sequence[int],
    max_iters: int = 100,
) -> FitResult:
    """Alternate nearest-medoid assignment and per-cluster medoid recomputation.

    Stops when the medoid set is unchanged or after max_iters. Loss is
    non-increasing per iteration. All evaluations are billed to phase
    "voronoi".
    """
    meds = [int(m) for m in init]
    if len(set(meds)) != k or len(meds) != k:
        raise ValueError(f"init must hold {k} distinct indices")
    before = oracle.phase_counts
    state = init_state(oracle, meds, phase="voronoi")
    trajectory: list[TrajectoryEvent] = []
    iterations = 0
    for _ in range(max_iters):
        new_meds = []
        for m in state.medoids:
            members = np.flatnonzero(state.nearest == m)
            if members.size == 0:
                new_meds.append(m)  # unreachable while nearest[m] == m holds
                continue
            sums = oracle.distances_many(members, members, "voronoi").sum(axis=1)
            new_meds.append(int(members[int(np.argmin(sums))]))
        if set(new_meds) == set(state.medoids):
            break
        changed = [
            (old, new)
            for old, new in zip(state.medoids, new_meds)
            if old != new
        ]
        state = init_state(oracle, new_meds, phase="voronoi")
        iterations += 1
        for old, new in changed:
            trajectory.append(
                TrajectoryEvent("swap", (old, new), state.loss, oracle.eval_count)
            )
    echo = {"algorithm": "voronoi", "k": k, "metric": oracle.metric.value,
            "max_iters": max_iters, "init": meds, "seed": None}
    return assemble_fit_result(state, oracle, trajectory, iterations, before, echo)
