"""Domain types shared by every solver: the dataset, the instrumented distance
oracle, the k-medoids loss, and the per-point (nearest medoid, d1, d2) caches.

Distances always use the orientation d(candidate_or_medoid, reference_point).
The oracle counts every underlying metric call exactly, keyed by a phase label,
so that search-cost experiments can assert evaluation counts rather than wall
time. No n x n pairwise matrix is ever materialized.
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from . import metrics
from .metrics import TreeNode

__all__ = [
    "ConfigError",
    "Dataset",
    "Metric",
    "DistanceOracle",
    "ClusterState",
    "TrajectoryEvent",
    "FitResult",
    "D2_SENTINEL",
    "total_loss",
    "init_state",
    "apply_add",
    "apply_swap",
    "assignments_with_tie_break",
]

# Stand-in for "no second medoid" when |M| = 1. Deliberately the largest finite
# float64 (not inf) so min(d2, x) arithmetic stays NaN-free.
D2_SENTINEL = float(np.finfo(np.float64).max)


class ConfigError(ValueError):
    """Invalid pairing of dataset kind and metric (an argument-level error)."""


class Metric(Enum):
    L1 = "l1"
    L2 = "l2"
    COSINE = "cosine"
    TREE_EDIT = "tree_edit"

    @property
    def is_vector(self) -> bool:
        return self is not Metric.TREE_EDIT


_ROW_FNS = {
    Metric.L1: metrics.l1_rows,
    Metric.L2: metrics.l2_rows,
    Metric.COSINE: metrics.cosine_rows,
}


class Dataset:
    """Immutable collection of n points: dense float64 vectors or labeled trees."""

    def __init__(self, points: Union[np.ndarray, Sequence[TreeNode]], point_kind: str):
        if point_kind not in ("vector", "tree"):
            raise ValueError(f"unknown point_kind {point_kind!r}")
        self.point_kind = point_kind
        if point_kind == "vector":
            arr = np.asarray(points, dtype=np.float64)
            if arr.ndim != 2:
                raise ValueError("vector datasets must be 2-d (n points x d dims)")
            if arr.shape[0] < 1 or arr.shape[1] < 1:
                raise ValueError("need n >= 1 points of dimensionality >= 1")
            arr = arr.copy()
            arr.setflags(write=False)
            self.vectors: Optional[np.ndarray] = arr
            self.trees: Optional[tuple[TreeNode, ...]] = None
            self.n = arr.shape[0]
            self.dim: Optional[int] = arr.shape[1]
        else:
            trees = tuple(points)
            if len(trees) < 1:
                raise ValueError("need n >= 1 trees")
            self.vectors = None
            self.trees = trees
            self.n = len(trees)
            self.dim = None

    @classmethod
    def from_vectors(cls, points) -> "Dataset":
        return cls(points, "vector")

    @classmethod
    def from_trees(cls, trees: Sequence[TreeNode]) -> "Dataset":
        return cls(trees, "tree")

    def __len__(self) -> int:
        return self.n


class DistanceOracle:
    """Metric evaluator over one dataset with an exact per-phase call counter.

    eval_count equals the number of metric invocations since construction or
    the last reset, and always equals sum(phase_counts.values()). Counter
    updates are lock-guarded so concurrent readers never see lost increments.
    """

    def __init__(self, dataset: Dataset, metric: Metric):
        if metric.is_vector != (dataset.point_kind == "vector"):
            raise ConfigError(
                f"metric {metric.value} cannot score {dataset.point_kind} points"
            )
        self.dataset = dataset
        self.metric = metric
        self._lock = threading.Lock()
        self._phase_counts: Counter[str] = Counter()

    # -- counters ----------------------------------------------------------

    def _count(self, phase: str, amount: int) -> None:
        with self._lock:
            self._phase_counts[phase] += amount

    @property
    def eval_count(self) -> int:
        with self._lock:
            return sum(self._phase_counts.values())

    @property
    def phase_counts(self) -> dict[str, int]:
        with self._lock:
            return dict(self._phase_counts)

    def reset_counts(self) -> None:
        with self._lock:
            self._phase_counts.clear()

    # -- evaluation --------------------------------------------------------

    def distance(self, i: int, j: int, phase: str) -> float:
        """d(x_i, x_j); counts exactly one evaluation, including when i == j."""
        return float(self.distances(i, np.array([j]), phase)[0])

    def distances(self, i: int, js: Optional[np.ndarray], phase: str) -> np.ndarray:
        """Row of d(x_i, x_j) for each j in js (js=None means all n points)."""
        return self.distances_many(np.array([i]), js, phase)[0]

    def distances_many(
        self, idx: np.ndarray, js: Optional[np.ndarray], phase: str
    ) -> np.ndarray:
        """(len(idx), len(js)) block of d(x_a, x_b); counts every cell."""
        idx = np.asarray(idx, dtype=np.intp)
        n = self.dataset.n
        if np.any(idx < 0) or np.any(idx >= n):
            raise IndexError("point index out of range")
        if js is None:
            js_arr = np.arange(n, dtype=np.intp)
        else:
            js_arr = np.asarray(js, dtype=np.intp)
            if js_arr.size and (js_arr.min() < 0 or js_arr.max() >= n):
                raise IndexError("point index out of range")
        self._count(phase, int(idx.size) * int(js_arr.size))
        if self.dataset.vectors is not None:
            X = self.dataset.vectors
            return _ROW_FNS[self.metric](X[idx], X[js_arr])
        trees = self.dataset.trees
        assert trees is not None
        out = np.empty((idx.size, js_arr.size), dtype=np.float64)
        for a, i in enumerate(idx):
            ti = trees[i]
            for b, j in enumerate(js_arr):
                out[a, b] = metrics.tree_edit_distance(ti, trees[j])
        return out


@dataclass
class ClusterState:
    """Medoid set plus the d1/d2 nearest-medoid caches all solvers advance.

    medoids is positional (BUILD order, swaps replace in place); nearest holds
    the closest medoid per point with ties resolved to the smallest medoid
    index, except that a medoid point is always its own nearest. d2 is the
    second-smallest distance of the same multiset, D2_SENTINEL when |M| = 1.
    """

    medoids: list[int]
    nearest: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    loss: float

    def copy(self) -> "ClusterState":
        return ClusterState(
            list(self.medoids),
            self.nearest.copy(),
            self.d1.copy(),
            self.d2.copy(),
            self.loss,
        )


@dataclass(frozen=True)
class TrajectoryEvent:
    """One optimization step: a BUILD addition or an accepted swap."""

    kind: str  # "build_add" | "swap"
    chosen: Union[int, tuple[int, int]]
    loss_after: float
    eval_count_snapshot: int


@dataclass
class FitResult:
    """Final medoids plus assignments, loss, and counting instrumentation."""

    medoids: list[int]
    assignments: np.ndarray
    loss: float
    swap_count: int
    trajectory: list[TrajectoryEvent]
    distance_evals: dict[str, int]
    config_echo: dict

    @property
    def total_distance_evals(self) -> int:
        return sum(self.distance_evals.values())


def total_loss(oracle: DistanceOracle, medoids: Sequence[int], phase: str = "maintenance") -> float:
    """Sum over points of the distance to the closest medoid (|M|*n evals)."""
    meds = list(medoids)
    if not meds:
        raise ValueError("medoid set must be non-empty")
    rows = oracle.distances_many(np.asarray(meds), None, phase)
    return float(rows.min(axis=0).sum())


def init_state(
    oracle: DistanceOracle, medoids: Sequence[int], phase: str = "maintenance"
) -> ClusterState:
    """Build nearest/d1/d2/loss from scratch with exactly |M|*n evaluations."""
    meds = list(dict.fromkeys(int(m) for m in medoids))
    if len(meds) != len(list(medoids)):
        raise ValueError("duplicate medoid indices")
    n = oracle.dataset.n
    if not 1 <= len(meds) <= n:
        raise ValueError(f"need 1 <= |medoids| <= {n}")
    rows = oracle.distances_many(np.asarray(meds), None, phase)

    # tie-break to the smallest medoid index: argmin over index-sorted rows
    order = np.argsort(np.asarray(meds), kind="stable")
    rows_sorted = rows[order]
    meds_sorted = np.asarray(meds)[order]
    pos = np.argmin(rows_sorted, axis=0)
    cols = np.arange(n)
    d1 = rows_sorted[pos, cols]
    nearest = meds_sorted[pos]
    if len(meds) == 1:
        d2 = np.full(n, D2_SENTINEL)
    else:
        d2 = np.partition(rows_sorted, 1, axis=0)[1]

    # a medoid point is always its own nearest; d(m,m) is minimal for the
    # shipped metrics so d1 is unchanged in value
    med_arr = np.asarray(meds)
    nearest[med_arr] = med_arr
    d1[med_arr] = rows[np.arange(len(meds)), med_arr]
    return ClusterState(meds, nearest, d1, d2, float(d1.sum()))


def apply_add(
    state: ClusterState,
    oracle: DistanceOracle,
    new_medoid: int,
    phase: str = "maintenance",
) -> ClusterState:
    """Grow the medoid set by one; n evaluations; equals init_state on the result."""
    new_medoid = int(new_medoid)
    if new_medoid in state.medoids:
        raise ValueError(f"point {new_medoid} is already a medoid")
    dn = oracle.distances(new_medoid, None, phase)

    old_meds = np.asarray(state.medoids)
    promote = (dn < state.d1) | ((dn == state.d1) & (new_medoid < state.nearest))
    d2 = np.minimum(state.d2, np.maximum(state.d1, dn))
    d1 = np.minimum(state.d1, dn)
    nearest = np.where(promote, new_medoid, state.nearest)
    # keep the self-assignment of every medoid point
    nearest[old_meds] = old_meds
    d1[old_meds] = state.d1[old_meds]
    nearest[new_medoid] = new_medoid
    d1[new_medoid] = dn[new_medoid]
    return ClusterState(
        state.medoids + [new_medoid], nearest, d1, d2, float(d1.sum())
    )


def apply_swap(
    state: ClusterState,
    oracle: DistanceOracle,
    m_out: int,
    x_in: int,
    phase: str = "maintenance",
) -> ClusterState:
    """Replace medoid m_out by x_in (in place in the medoid order).

    Recomputes the caches from scratch (|M|*n evaluations) per the
    correctness-first contract; the result is field-identical to init_state on
    the swapped set.
    """
    if m_out not in state.medoids:
        raise ValueError(f"point {m_out} is not a medoid")
    if x_in in state.medoids:
        raise ValueError(f"point {x_in} is already a medoid")
    new_meds = [int(x_in) if m == m_out else m for m in state.medoids]
    return init_state(oracle, new_meds, phase)


def assignments_with_tie_break(
    state: ClusterState, oracle: DistanceOracle, phase: str = "maintenance"
) -> np.ndarray:
    """Per-point medoid labels, ties resolved to the smallest medoid index.

    Differs from state.nearest only where several medoids are equidistant
    (detected via d1 == d2), so the extra probing cost is zero on generic data.
    """
    labels = state.nearest.copy()
    meds_sorted = sorted(state.medoids)
    tie_js = np.flatnonzero(state.d1 == state.d2)
    for j in tie_js:
        for m in meds_sorted:
            if oracle.distance(m, int(j), phase) == state.d1[j]:
                labels[j] = m
                break
    return labels
