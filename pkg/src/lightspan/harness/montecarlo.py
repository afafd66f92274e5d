"""Probability that a fixed base cycle turns light after embedding.

For a base cycle of length L = 2k + 2c every node owns a cluster of
m = k/eps positions; each of its two cycle edges lands on an independent
uniform position there. The corresponding cycle weighs L/eps + sigma where
sigma sums the intra-cluster gaps, so it is light (normalized weight at most
(1 + eps) 2k) exactly when sigma <= 2k - 2c/eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from ..construction import (
    ConstructionParams,
    build_layout,
    corresponding_cycle,
    embed_edges,
    as_epsilon,
)
from ..girth_graphs import GirthGraph, as_rng
from ..graph import Cycle, WeightedGraph

MIN_TRIALS = 1000


def cycle_base(length: int) -> GirthGraph:
    if length < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    g = WeightedGraph(length, [(i, (i + 1) % length) for i in range(length)])
    side = tuple(i % 2 for i in range(length)) if length % 2 == 0 else None
    return GirthGraph(
        g, (length - 1) // 2, (2, 2), side,
        {"generator": "cycle", "params": {"length": length}, "seed": None, "certified_girth": length},
    )


def sigma_budget(k: int, c: int, epsilon) -> int:
    """Largest sigma that still makes the corresponding cycle light (may be negative)."""
    inv = as_epsilon(epsilon).denominator
    return 2 * k - 2 * c * inv


def exact_light_probability(k: int, c: int, epsilon) -> Fraction:
    """P(sigma <= budget) by exact convolution of the L gap distributions."""
    inv = as_epsilon(epsilon).denominator
    m, L = k * inv, 2 * k + 2 * c
    budget = sigma_budget(k, c, epsilon)
    if budget < 0:
        return Fraction(0)
    # |a - b| for independent uniform a, b in [0, m): counts out of m^2
    gap = [m] + [2 * (m - j) for j in range(1, m)]
    gap = gap[: budget + 1]
    dist = [1]
    for _ in range(L):
        nxt = [0] * min(len(dist) + len(gap) - 1, budget + 1)
        for s, a in enumerate(dist):
            if not a:
                continue
            for j, b in enumerate(gap):
                if s + j > budget:
                    break
                nxt[s + j] += a * b
        dist = nxt
    return Fraction(sum(dist), m ** (2 * L))


def sample_light_count(k: int, c: int, epsilon, trials: int, seed=None, chunk: int = 1_000_000) -> int:
    """Number of light embeddings among ``trials`` vectorized draws."""
    inv = as_epsilon(epsilon).denominator
    m, L = k * inv, 2 * k + 2 * c
    budget = sigma_budget(k, c, epsilon)
    rng = as_rng(seed)
    hits = 0
    left = trials
    while left > 0:
        b = min(chunk, left)
        pos = rng.integers(0, m, size=(b, L, 2))
        sigma = np.abs(pos[:, :, 0] - pos[:, :, 1]).sum(axis=1)
        hits += int(np.count_nonzero(sigma <= budget))
        left -= b
    return hits


def embedded_light_count(k: int, c: int, epsilon, trials: int, seed=None) -> int:
    """Same event measured on real embeddings of a cycle base (slow, for cross-checks)."""
    eps = as_epsilon(epsilon)
    base = cycle_base(2 * k + 2 * c)
    ConstructionParams(k, eps, base)
    rng = as_rng(seed)
    x = Cycle.from_edges(base.graph, list(range(base.graph.edge_count)))
    hits = 0
    for _ in range(trials):
        inst = embed_edges(base, build_layout(base, k, eps, rng), eps, rng)
        cyc, _ = corresponding_cycle(inst, x)
        hits += cyc.normalized_weight <= inst.threshold
    return hits


def probability_bound(k: int, c: int, epsilon, constant: float = 8.0) -> float:
    """``(constant * eps)**L / L!`` with L = 2k + 2c."""
    L = 2 * k + 2 * c
    return (constant * float(as_epsilon(epsilon))) ** L / math.factorial(L)


def wilson_interval(hits: int, trials: int) -> tuple[float, float]:
    ci = stats.binomtest(hits, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class MonteCarloPoint:
    epsilon: Fraction
    seed: int
    trials: int
    hits: int
    exact: Fraction
    bound: float

    @property
    def estimate(self) -> float:
        return self.hits / self.trials

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.hits, self.trials)


def run_point(k: int, c: int, epsilon, trials: int, seed: int, index: int = 0,
              chunk: int = 1_000_000, bound_constant: float = 8.0) -> MonteCarloPoint:
    if trials < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials, got {trials}")
    eps = as_epsilon(epsilon)
    rng = np.random.default_rng([seed, index])
    hits = sample_light_count(k, c, eps, trials, rng, chunk)
    return MonteCarloPoint(eps, seed, trials, hits, exact_light_probability(k, c, eps),
                           probability_bound(k, c, eps, bound_constant))
