"""Generic adaptive best-arm search: batched sampling with replacement, running
means with compensated accumulation, per-arm confidence radii, successive
elimination, first-batch sigma estimation, and an exact fallback pass.

One reference batch per iteration is shared by all surviving arms; the batch
indices are drawn up front from a seeded PCG64 generator, so results do not
depend on evaluation order or thread count. Setting ci_multiplier to +inf
disables elimination entirely, which forces the exact-fallback path and makes
the search equivalent to a brute-force argmin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "ArmStats",
    "SearchConfig",
    "ArmEvaluator",
    "SearchOutcome",
    "estimate_sigmas",
    "confidence_radius",
    "adaptive_search",
]


@dataclass
class SearchConfig:
    """Hyperparameters of the adaptive search (and the solver built on it).

    delta=None resolves to 1/(1000*|targets|) at call time with the current
    target count. verify_swaps is consumed by the k-medoids solver, not the
    engine. seed feeds a PCG64 generator.
    """

    batch_size: int = 100
    delta: Optional[float] = None
    ci_multiplier: float = 1.0
    sigma_floor: float = 1e-9
    seed: int = 0
    verify_swaps: bool = True

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.ci_multiplier < 0:
            raise ValueError("ci_multiplier must be >= 0 (or +inf)")
        if self.sigma_floor < 0:
            raise ValueError("sigma_floor must be >= 0")


@dataclass
class ArmStats:
    """Final per-arm statistics; frozen at elimination time for dead arms."""

    mean_est: float
    ci_radius: float
    n_sampled: int
    sigma: float
    alive: bool
    includes_sigma_batch: bool = True


class ArmEvaluator:
    """Adapter from a target set to per-reference objective values g_x(y).

    g must be deterministic given (target, reference). g_batch and exact_means
    may be overridden to share computation across arms; the defaults delegate
    to g. The phase label is forwarded to whatever counting backend the
    evaluator wraps.
    """

    targets: Sequence = ()
    ref_count: int = 0
    base_phase: str = "search"

    def g(self, target, ref: int, phase: str) -> float:
        raise NotImplementedError

    def g_batch(self, targets: Sequence, refs: np.ndarray, phase: str) -> np.ndarray:
        out = np.empty((len(targets), len(refs)), dtype=np.float64)
        for a, t in enumerate(targets):
            for b, j in enumerate(refs):
                out[a, b] = self.g(t, int(j), phase)
        return out

    def exact_means(self, targets: Sequence, phase: str) -> np.ndarray:
        all_refs = np.arange(self.ref_count)
        return self.g_batch(targets, all_refs, phase).mean(axis=1)


@dataclass
class SearchOutcome:
    winner: object
    stats: list[ArmStats]
    used_exact_fallback: bool
    winner_exact_mean: Optional[float] = None  # set when the fallback ran


def estimate_sigmas(
    evaluator: ArmEvaluator,
    first_batch: np.ndarray,
    sigma_floor: float = 1e-9,
    phase: str = "sigma_est",
) -> tuple[np.ndarray, np.ndarray]:
    """Per-target population std of g over the first batch, floored.

    Returns (sigmas, g_values); the g_values are reused as the arms' first
    batch of samples so nothing is evaluated twice.
    """
    if len(first_batch) == 0:
        raise ValueError("first_batch must be non-empty")
    g_values = evaluator.g_batch(list(evaluator.targets), first_batch, phase)
    sigmas = np.maximum(g_values.std(axis=1), sigma_floor)
    return sigmas, g_values


def confidence_radius(
    sigma, delta: float, n_used: int, ci_multiplier: float = 1.0
):
    """ci_multiplier * sigma * sqrt(ln(1/delta)/n_used); +inf multiplier gives +inf.

    Works elementwise when sigma is an array.
    """
    if n_used < 1:
        raise ValueError("n_used must be >= 1")
    if math.isinf(ci_multiplier):
        if np.ndim(sigma) == 0:
            return math.inf
        return np.full(np.shape(sigma), np.inf)
    factor = math.sqrt(math.log(1.0 / delta) / n_used)
    return ci_multiplier * sigma * factor


def adaptive_search(
    evaluator: ArmEvaluator,
    config: SearchConfig,
    iteration_hook: Optional[Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]] = None,
) -> SearchOutcome:
    """Successive-elimination search for the target with the smallest mean g.

    Loops while fewer references have been consumed than exist and more than
    one arm survives: draw one shared batch with replacement, update every
    surviving arm's running mean and radius (sigma comes from the first
    batch), then drop arms whose lower bound exceeds the best survivor's upper
    bound. A lone survivor is returned directly; otherwise survivors' means
    are computed exactly (phase "exact_fallback") and the argmin wins, ties to
    the earliest target.
    """
    targets = list(evaluator.targets)
    n_arms = len(targets)
    ref_count = evaluator.ref_count
    if n_arms < 1 or ref_count < 1:
        raise ValueError("need at least one target and one reference")
    delta = config.delta if config.delta is not None else 1.0 / (1000.0 * n_arms)

    alive = np.ones(n_arms, dtype=bool)
    sums = np.zeros(n_arms)
    comp = np.zeros(n_arms)  # Kahan compensation for the running sums
    n_sampled = np.zeros(n_arms, dtype=np.int64)
    sigmas = np.zeros(n_arms)
    means = np.zeros(n_arms)
    radii = np.full(n_arms, np.inf)

    rng = np.random.default_rng(config.seed)
    n_used = 0
    first = True
    B = config.batch_size
    while n_used < ref_count and int(alive.sum()) > 1:
        batch = rng.integers(0, ref_count, size=B)
        idx = np.flatnonzero(alive)
        if first:
            # every arm is alive on the first iteration, so the sigma batch
            # doubles as each arm's first batch of samples
            sigmas[:], g_vals = estimate_sigmas(evaluator, batch, config.sigma_floor)
            first = False
        else:
            g_vals = evaluator.g_batch(
                [targets[i] for i in idx], batch, evaluator.base_phase
            )
        batch_sums = g_vals.sum(axis=1)
        y = batch_sums - comp[idx]
        t = sums[idx] + y
        comp[idx] = (t - sums[idx]) - y
        sums[idx] = t
        n_sampled[idx] += B
        n_used += B
        means[idx] = sums[idx] / n_sampled[idx]
        radii[idx] = confidence_radius(
            sigmas[idx], delta, n_used, config.ci_multiplier
        )
        threshold = np.min(means[idx] + radii[idx])
        alive[idx] &= ~(means[idx] - radii[idx] > threshold)
        if iteration_hook is not None:
            iteration_hook(n_used, alive.copy(), means.copy(), radii.copy())

    survivors = np.flatnonzero(alive)
    used_exact = False
    winner_exact_mean = None
    if survivors.size == 1:
        winner_idx = int(survivors[0])
    else:
        exact = evaluator.exact_means(
            [targets[i] for i in survivors], "exact_fallback"
        )
        best = int(np.argmin(exact))
        winner_idx = int(survivors[best])
        winner_exact_mean = float(exact[best])
        used_exact = True

    stats = [
        ArmStats(
            mean_est=float(means[i]) if n_sampled[i] else 0.0,
            ci_radius=float(radii[i]),
            n_sampled=int(n_sampled[i]),
            sigma=float(sigmas[i]),
            alive=bool(alive[i]),
        )
        for i in range(n_arms)
    ]
    return SearchOutcome(targets[winner_idx], stats, used_exact, winner_exact_mean)
