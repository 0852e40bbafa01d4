"""Cardinality-constrained greedy maximization of monotone submodular functions.

Three interchangeable algorithms (naive, lazy, stochastic) plus a ground-set
partitioning wrapper. Ties in every argmax break toward the smallest item id
so that all algorithms are mutually reproducible; lazy greedy must return the
exact trace naive greedy would, in no more function evaluations.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MaximizerConfig:
    """Settings for one maximization run.

    epsilon is the stochastic-greedy accuracy knob (required there, unused
    elsewhere); partitions > 1 routes through partitioned_maximize.
    """

    budget: int
    algorithm: str = "lazy"
    epsilon: float | None = None
    seed: int = 0
    partitions: int = 1

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError(f"budget must be nonnegative, got {self.budget}")
        if self.algorithm not in ("naive", "lazy", "stochastic"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "stochastic":
            if self.epsilon is None or not (0.0 < self.epsilon < 1.0):
                raise ValueError("stochastic greedy needs epsilon in (0, 1)")
        elif self.epsilon is not None:
            raise ValueError("epsilon is only meaningful for stochastic greedy")
        if self.partitions < 1:
            raise ValueError(f"partitions must be >= 1, got {self.partitions}")


@dataclass
class SelectionTrace:
    """Greedy pick sequence with per-pick marginal gains and query count."""

    chosen: list[int] = field(default_factory=list)
    gains: list[float] = field(default_factory=list)
    evaluations: int = 0


def naive_greedy(f, cfg: MaximizerConfig) -> SelectionTrace:
    """Plain greedy: re-evaluate every remaining candidate each round."""
    n = f.ground_size
    b = min(cfg.budget, n)
    trace = SelectionTrace()
    if b == 0:
        return trace
    ev = f.evaluator()
    remaining = np.arange(n)
    for _ in range(b):
        gains = ev.gains(remaining)
        trace.evaluations += len(remaining)
        k = int(np.argmax(gains))  # first max = smallest id on ties
        x = int(remaining[k])
        trace.chosen.append(x)
        trace.gains.append(float(gains[k]))
        ev.add(x)
        remaining = np.delete(remaining, k)
    return trace


def lazy_greedy(f, cfg: MaximizerConfig) -> SelectionTrace:
    """Priority-queue greedy with stale upper bounds on marginal gains.

    Heap entries are (-gain, id, round_stamp); a popped entry whose stamp is
    current needs no re-evaluation. A refreshed entry is accepted only if it
    still beats the best remaining bound, with the id as tiebreaker, which
    reproduces naive greedy's choices exactly.
    """
    n = f.ground_size
    b = min(cfg.budget, n)
    trace = SelectionTrace()
    if b == 0:
        return trace
    ev = f.evaluator()
    init_gains = ev.gains(np.arange(n))
    trace.evaluations += n
    heap = [(-init_gains[i], i, 0) for i in range(n)]
    heapq.heapify(heap)
    while heap and len(trace.chosen) < b:
        neg_gain, x, stamp = heapq.heappop(heap)
        if stamp != len(trace.chosen):
            fresh = float(ev.gains(np.array([x]))[0])
            trace.evaluations += 1
            entry = (-fresh, x, len(trace.chosen))
            if heap and entry > heap[0]:
                heapq.heappush(heap, entry)
                continue
            neg_gain = -fresh
        trace.chosen.append(x)
        trace.gains.append(-neg_gain)
        ev.add(x)
    return trace


def stochastic_greedy(f, cfg: MaximizerConfig) -> SelectionTrace:
    """Greedy over a fresh uniform sample of candidates each round.

    Sample size is ceil((n / b) * ln(1 / epsilon)), capped at the remaining
    candidate count; sampling is without replacement and seeded.
    """
    n = f.ground_size
    b = min(cfg.budget, n)
    trace = SelectionTrace()
    if b == 0:
        return trace
    rng = np.random.default_rng(cfg.seed)
    sample_size = math.ceil((n / b) * math.log(1.0 / cfg.epsilon))
    ev = f.evaluator()
    remaining = np.arange(n)
    for _ in range(b):
        if sample_size >= len(remaining):
            cand = remaining
        else:
            cand = np.sort(rng.choice(remaining, size=sample_size, replace=False))
        gains = ev.gains(cand)
        trace.evaluations += len(cand)
        k = int(np.argmax(gains))
        x = int(cand[k])
        trace.chosen.append(x)
        trace.gains.append(float(gains[k]))
        ev.add(x)
        remaining = remaining[remaining != x]
    return trace


_ALGORITHMS = {
    "naive": naive_greedy,
    "lazy": lazy_greedy,
    "stochastic": stochastic_greedy,
}


def maximize(f, cfg: MaximizerConfig) -> SelectionTrace:
    """Run the configured algorithm on a single (unpartitioned) instance."""
    return _ALGORITHMS[cfg.algorithm](f, cfg)


def partitioned_maximize(f_builder, ground_size: int, cfg: MaximizerConfig) -> SelectionTrace:
    """Split the ground set round-robin by id and maximize each part.

    Args:
        f_builder: callable(ids) -> set-function instance whose local ground
            indices align with positions in ids.
        ground_size: total number of items.
        cfg: partitions = p; the budget splits as floor(b/p) per partition
            with the remainder (and any capacity shortfall) pushed to the
            lowest-index partitions.

    Returns a combined trace; gains are per-partition marginal gains in
    partition order.
    """
    p = cfg.partitions
    if p > ground_size:
        raise ValueError(f"cannot split {ground_size} items into {p} partitions")
    b = min(cfg.budget, ground_size)
    if p == 1:
        trace = maximize(f_builder(np.arange(ground_size)), cfg)
        trace.chosen = [int(x) for x in trace.chosen]
        return trace

    parts = [np.arange(k, ground_size, p) for k in range(p)]  # id % p == k
    quotas = [min(b // p + (1 if k < b % p else 0), len(parts[k])) for k in range(p)]
    leftover = b - sum(quotas)
    while leftover > 0:
        for k in range(p):
            if quotas[k] < len(parts[k]):
                quotas[k] += 1
                leftover -= 1
                if leftover == 0:
                    break

    combined = SelectionTrace()
    for ids, quota in zip(parts, quotas):
        part_cfg = MaximizerConfig(
            budget=quota,
            algorithm=cfg.algorithm,
            epsilon=cfg.epsilon,
            seed=cfg.seed,
            partitions=1,
        )
        sub = maximize(f_builder(ids), part_cfg)
        combined.chosen.extend(int(ids[i]) for i in sub.chosen)
        combined.gains.extend(sub.gains)
        combined.evaluations += sub.evaluations
    return combined
