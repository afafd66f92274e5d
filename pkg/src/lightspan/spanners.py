"""Greedy spanners and stretch verification."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ConnectivityError, ParameterError, SubgraphError
from .graph import (
    INF,
    GirthCertificate,
    WeightedGraph,
    _dijkstra,
    _first_stranded,
    is_subgraph,
    lightness,
    weighted_girth,
)

__all__ = [
    "SpannerResult",
    "StretchReport",
    "greedy_spanner",
    "unweighted_greedy_spanner",
    "verify_stretch",
    "moore_bound",
    "upper_bound_lightness",
]


@dataclass(frozen=True)
class SpannerResult:
    spanner: WeightedGraph
    stretch_t: Fraction
    kept: tuple[int, ...]
    lightness_value: Fraction
    girth_certificate: GirthCertificate
    moore_bound: Optional[float] = None

    @property
    def edge_count(self) -> int:
        return self.spanner.edge_count


@dataclass(frozen=True)
class StretchReport:
    passed: bool
    witness_edge: Optional[int] = None
    detour: object = None

    def __bool__(self) -> bool:
        return self.passed


def greedy_spanner(g: WeightedGraph, t) -> SpannerResult:
    """Classic greedy t-spanner.

    Edges are scanned by nondecreasing weight (ties by id) and kept iff the
    spanner built so far has no u-v path of length <= t * w(e). Each search
    is capped at that budget. The output has weighted girth > t + 1.
    """
    t = Fraction(t)
    if t < 1:
        raise ParameterError(f"stretch must be >= 1, got {t}")
    stranded = _first_stranded(g)
    if stranded is not None:
        raise ConnectivityError(stranded)
    adj: list[list] = [[] for _ in range(g.node_count)]
    kept = []
    for e in sorted(g.edges, key=lambda e: (e.weight, e.id)):
        budget = t * e.weight
        if g.integral:
            budget = math.floor(budget)
        d, _ = _dijkstra(adj, e.u, e.v, limit=budget)
        if d > budget:
            adj[e.u].append((e.v, e.id, e.weight))
            adj[e.v].append((e.u, e.id, e.weight))
            kept.append(e.id)
    kept.sort()
    h = g.with_edges(kept)
    return SpannerResult(
        spanner=h,
        stretch_t=t,
        kept=tuple(kept),
        lightness_value=lightness(h, g),
        girth_certificate=weighted_girth(h),
    )


def moore_bound(n: int, k: int) -> float:
    """Edge-count ceiling n^{1+1/k} + n for graphs of girth > 2k."""
    return n ** (1 + 1 / k) + n


def unweighted_greedy_spanner(g: WeightedGraph, k: int) -> SpannerResult:
    """Greedy (2k-1)-spanner of a unit-weight graph; its girth exceeds 2k."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    if not g.is_unit_weight():
        raise ParameterError("unweighted greedy spanner needs unit weights")
    res = greedy_spanner(g, 2 * k - 1)
    return SpannerResult(
        res.spanner, res.stretch_t, res.kept, res.lightness_value, res.girth_certificate,
        moore_bound=moore_bound(g.node_count, k),
    )


def verify_stretch(g: WeightedGraph, h: WeightedGraph, t) -> StretchReport:
    """Check dist_h(u, v) <= t * w(u, v) for every edge of g missing from h.

    Any shortest path of g is a chain of edges, so bounding the detour of
    each missing edge bounds every pairwise distance; edges present in h
    are trivially fine. The first violating g edge id is returned on failure.
    """
    if not is_subgraph(h, g):
        raise SubgraphError("h contains an edge absent from g")
    t = Fraction(t)
    present = Counter(e.key for e in h.edges)
    adj = [h.neighbors(x) for x in range(h.node_count)] + [() for _ in range(g.node_count - h.node_count)]
    for e in g.edges:
        if present[e.key]:
            continue
        budget = t * e.weight
        if h.integral:
            budget = math.floor(budget)
        d, _ = _dijkstra(adj, e.u, e.v, limit=budget)
        if d > budget:
            d, _ = _dijkstra(adj, e.u, e.v)
            return StretchReport(False, e.id, d)
    return StretchReport(True)


def upper_bound_lightness(n: int, k: int, epsilon, gamma_estimate: Optional[float] = None) -> float:
    """eps^-1 * gamma / n, with gamma defaulting to the conjectured n^{1+1/k}."""
    if gamma_estimate is None:
        gamma_estimate = n ** (1 + 1 / k)
    if gamma_estimate <= 0:
        raise ParameterError("gamma_estimate must be positive")
    return float(gamma_estimate) / (float(epsilon) * n)
