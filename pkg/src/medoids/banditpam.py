"""Bandit-accelerated k-medoids: k adaptive BUILD searches over candidate
points, then repeated adaptive SWAP searches over (medoid, non-medoid) pair
arms scored with the FastPAM1 delta decomposition.

Within a SWAP batch the distance d(x, x_j) is evaluated once per candidate x
and shared across all pair arms (m, x), so a full batch costs (n-k)*B counted
evaluations rather than k(n-k)*B. Exact evaluations (fallback and the optional
winner-verification pass) reuse the same delta kernels as the exact solvers,
which makes fit(ci_multiplier=+inf) reproduce run_pam("fastpam1") decision for
decision.
"""

from __future__ import annotations

from dataclasses import replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .bandit import ArmEvaluator, SearchConfig, adaptive_search
from .core import (
    ClusterState,
    DistanceOracle,
    FitResult,
    TrajectoryEvent,
    apply_add,
    apply_swap,
    init_state,
)
from .exact import (
    assemble_fit_result,
    build_delta_total,
    swap_delta_totals,
)

__all__ = [
    "PairArm",
    "BuildEvaluator",
    "SwapEvaluator",
    "build_arm_g",
    "swap_arm_g",
    "banditpam_build",
    "banditpam_swap_once",
    "fit",
]


class PairArm(NamedTuple):
    m: int
    x: int


def build_arm_g(
    state: Optional[ClusterState], oracle: DistanceOracle, x: int, j: int,
    phase: str = "build",
) -> float:
    """BUILD arm objective for candidate x on reference j (one evaluation).

    min(d(x, x_j) - d1[j], 0) against the current caches; with no medoids yet
    the objective is the raw distance d(x, x_j).
    """
    d = oracle.distance(x, j, phase)
    if state is None:
        return d
    return min(d - float(state.d1[j]), 0.0)


def swap_arm_g(
    state: ClusterState, oracle: DistanceOracle, arm: PairArm, j: int,
    phase: str = "swap",
) -> float:
    """SWAP arm objective (FastPAM1 delta) for pair (m, x) on reference j."""
    d = oracle.distance(arm.x, j, phase)
    if int(state.nearest[j]) == arm.m:
        return min(float(state.d2[j]), d) - float(state.d1[j])
    return min(float(state.d1[j]), d) - float(state.d1[j])


class BuildEvaluator(ArmEvaluator):
    """Arms = candidate medoids, references = all points."""

    base_phase = "build"

    def __init__(self, oracle: DistanceOracle, state: Optional[ClusterState]):
        self.oracle = oracle
        self.state = state
        in_set = set(state.medoids) if state is not None else set()
        self.targets = [x for x in range(oracle.dataset.n) if x not in in_set]
        self.ref_count = oracle.dataset.n

    def g(self, target: int, ref: int, phase: str) -> float:
        return build_arm_g(self.state, self.oracle, target, ref, phase)

    def g_batch(self, targets: Sequence[int], refs: np.ndarray, phase: str) -> np.ndarray:
        rows = self.oracle.distances_many(np.asarray(targets), refs, phase)
        if self.state is None:
            return rows
        return np.minimum(rows - self.state.d1[refs], 0.0)

    def exact_means(self, targets: Sequence[int], phase: str) -> np.ndarray:
        n = self.ref_count
        out = np.empty(len(targets))
        for a, x in enumerate(targets):
            row = self.oracle.distances(x, None, phase)
            if self.state is None:
                out[a] = float(row.sum()) / n
            else:
                out[a] = build_delta_total(row, self.state.d1) / n
        return out


class SwapEvaluator(ArmEvaluator):
    """Arms = (medoid, non-medoid) pairs in (medoid position, candidate) order.

    Distance rows are computed once per candidate and shared across that
    candidate's pair arms, both for sampled batches and exact passes.
    """

    base_phase = "swap"

    def __init__(self, oracle: DistanceOracle, state: ClusterState):
        self.oracle = oracle
        self.state = state
        in_set = set(state.medoids)
        non_medoids = [x for x in range(oracle.dataset.n) if x not in in_set]
        self.targets = [
            PairArm(m, x) for m in state.medoids for x in non_medoids
        ]
        self.ref_count = oracle.dataset.n

    def g(self, target: PairArm, ref: int, phase: str) -> float:
        return swap_arm_g(self.state, self.oracle, target, ref, phase)

    def _groups(self, arms: Sequence[PairArm]) -> dict[int, list[tuple[int, int]]]:
        """candidate x -> [(position in arms, medoid id)], preserving order."""
        groups: dict[int, list[tuple[int, int]]] = {}
        for pos, arm in enumerate(arms):
            groups.setdefault(arm.x, []).append((pos, arm.m))
        return groups

    def g_batch(self, arms: Sequence[PairArm], refs: np.ndarray, phase: str) -> np.ndarray:
        st = self.state
        d1r, d2r, nr = st.d1[refs], st.d2[refs], st.nearest[refs]
        out = np.empty((len(arms), len(refs)), dtype=np.float64)
        for x, members in self._groups(arms).items():
            row = self.oracle.distances(x, refs, phase)
            a = np.minimum(row, d1r) - d1r
            b = np.minimum(row, d2r) - d1r
            for pos, m in members:
                out[pos] = np.where(nr == m, b, a)
        return out

    def exact_means(self, arms: Sequence[PairArm], phase: str) -> np.ndarray:
        st = self.state
        n = self.ref_count
        out = np.empty(len(arms))
        for x, members in self._groups(arms).items():
            row = self.oracle.distances(x, None, phase)
            deltas = swap_delta_totals(
                row, st.d1, st.d2, st.nearest, [m for _, m in members]
            )
            for (pos, _), delta in zip(members, deltas):
                out[pos] = delta / n
        return out


def _spawn_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63))


def banditpam_build(
    oracle: DistanceOracle,
    k: int,
    config: SearchConfig,
    seed_stream: Optional[np.random.Generator] = None,
) -> tuple[ClusterState, list[TrajectoryEvent]]:
    """k adaptive BUILD searches; sigma is re-estimated on every call."""
    n = oracle.dataset.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    if seed_stream is None:
        seed_stream = np.random.default_rng(config.seed)
    state: Optional[ClusterState] = None
    trajectory: list[TrajectoryEvent] = []
    for _ in range(k):
        evaluator = BuildEvaluator(oracle, state)
        outcome = adaptive_search(evaluator, replace(config, seed=_spawn_seed(seed_stream)))
        winner = int(outcome.winner)
        if state is None:
            state = init_state(oracle, [winner])
        else:
            state = apply_add(state, oracle, winner)
        trajectory.append(
            TrajectoryEvent("build_add", winner, state.loss, oracle.eval_count)
        )
    assert state is not None
    return state, trajectory


def banditpam_swap_once(
    state: ClusterState,
    oracle: DistanceOracle,
    config: SearchConfig,
    seed: Optional[int] = None,
) -> Optional[tuple[int, int]]:
    """One adaptive SWAP search; returns the accepted (m_out, x_in) or None.

    With verify_swaps on (the default), the winner's delta is recomputed
    exactly over all n references (phase "exact_fallback") and the swap is
    accepted only if it is strictly negative, which guarantees monotone loss
    even when the bandit errs. With it off, the search's own mean estimate
    decides, as in the uninstrumented algorithm.
    """
    if seed is None:
        seed = config.seed
    evaluator = SwapEvaluator(oracle, state)
    if not evaluator.targets:
        return None
    outcome = adaptive_search(evaluator, replace(config, seed=seed))
    winner: PairArm = outcome.winner
    if config.verify_swaps:
        row = oracle.distances(winner.x, None, "exact_fallback")
        delta = float(
            swap_delta_totals(row, state.d1, state.d2, state.nearest, [winner.m])[0]
        )
    elif outcome.used_exact_fallback:
        delta = outcome.winner_exact_mean
    else:
        delta = outcome.stats[evaluator.targets.index(winner)].mean_est
    if not delta < 0.0:
        return None
    return (winner.m, winner.x)


def fit(
    oracle: DistanceOracle,
    k: int,
    config: Optional[SearchConfig] = None,
    max_swaps: int = 100,
) -> FitResult:
    """Adaptive BUILD, then adaptive swaps until convergence or max_swaps.

    Deterministic given (dataset, k, config including seed).
    """
    if config is None:
        config = SearchConfig()
    if max_swaps < 0:
        raise ValueError("max_swaps must be >= 0")
    before = oracle.phase_counts
    seed_stream = np.random.default_rng(config.seed)
    state, trajectory = banditpam_build(oracle, k, config, seed_stream)
    swaps = 0
    while swaps < max_swaps and k < oracle.dataset.n:
        choice = banditpam_swap_once(
            state, oracle, config, seed=_spawn_seed(seed_stream)
        )
        if choice is None:
            break
        state = apply_swap(state, oracle, *choice)
        swaps += 1
        trajectory.append(
            TrajectoryEvent("swap", choice, state.loss, oracle.eval_count)
        )
    echo = {
        "algorithm": "banditpam",
        "k": k,
        "metric": oracle.metric.value,
        "seed": config.seed,
        "batch_size": config.batch_size,
        "delta": config.delta,
        "ci_multiplier": config.ci_multiplier,
        "sigma_floor": config.sigma_floor,
        "verify_swaps": config.verify_swaps,
        "max_swaps": max_swaps,
    }
    return assemble_fit_result(state, oracle, trajectory, swaps, before, echo)
