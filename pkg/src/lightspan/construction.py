"""Weighted lower-bound instances for light spanners.

A base graph G (girth > 2(k-1), bipartite) is embedded into a unit-weight
spanning cycle of N = 4k/eps * n nodes. The cycle alternates clusters of
k/eps nodes with spacers of 3k/eps nodes; every base edge becomes one edge
of weight 1/eps between uniform random nodes of its endpoints' clusters.
Pruning then deletes the heavy edges of every cycle whose normalized weight
is at most (1 + eps) * 2k, and a from-scratch weighted-girth computation
certifies the result.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Optional

import numpy as np

from .errors import CertificationError, ParameterError, StructuralError
from .girth_graphs import GirthGraph, as_rng
from .graph import (
    Cycle,
    GirthCertificate,
    WeightedGraph,
    enumerate_cycles,
    weighted_girth,
)

__all__ = [
    "as_epsilon",
    "ConstructionParams",
    "CycleLayout",
    "EmbeddedInstance",
    "solve_epsilon",
    "epsilon_for_base",
    "plan_from_target",
    "build_layout",
    "embed_edges",
    "corresponding_cycle",
    "prune_light_cycles",
    "surviving_fraction",
    "predicted_lightness",
    "expected_kill_bound",
    "kill_geometric_sum",
    "light_cycle_scan",
    "run_construction",
]

MAX_INV_EPSILON = 10**9
DEFAULT_CONSTANTS = {"epsilon_constant": 1.0, "kill_budget": 0.25}


def as_epsilon(value) -> Fraction:
    """Parse epsilon (Fraction, int, str like ``"1/8"``) and check 0 < eps < 1 with 1/eps integral."""
    try:
        eps = Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"cannot parse epsilon {value!r}") from exc
    if not 0 < eps < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {eps}")
    if eps.numerator != 1:
        raise ParameterError(f"1/epsilon must be an integer, got epsilon = {eps}")
    return eps


# ----------------------------------------------------------------------
# parameter algebra


def _ceil_inverse(raw: float) -> int:
    x = 1.0 / raw
    r = round(x)
    if r >= 1 and abs(x - r) <= 1e-9 * max(1.0, x):
        return int(r)
    return int(math.ceil(x))


def _c0_inverse(N_target: int, k: int, constant: float) -> int:
    """Smallest integer inv >= 1 with (constant * k * inv)**(2k-1) >= N_target, checked exactly."""
    inv = max(1, _ceil_inverse(constant * k * N_target ** (-1.0 / (2 * k - 1))))
    scale = Fraction(constant) * k
    while inv > 1 and (scale * (inv - 1)) ** (2 * k - 1) >= N_target:
        inv -= 1
    while (scale * inv) ** (2 * k - 1) < N_target:
        inv += 1
    return inv


def solve_epsilon(N_target: int, k: int, c: int = 0, constant: float = 1.0) -> Fraction:
    """Largest admissible epsilon for a spanning cycle of ``N_target`` nodes.

    For c = 0 this is ``constant * k * N**(-1/(2k-1))``; otherwise
    ``constant * k**a * N**(-b)`` with a = (k-1)(2k+2c)/(2k^2+2kc-k) and
    b = (k+2c)/(2k^2+2kc-k). The result is rounded down to the nearest
    unit fraction (1/eps rounded up).
    """
    if k < 2:
        raise ParameterError("k must be >= 2")
    if c < 0 or N_target < 1:
        raise ParameterError("need c >= 0 and N_target >= 1")
    if constant <= 0:
        raise ParameterError("constant must be positive")
    if c == 0:
        inv = _c0_inverse(N_target, k, constant)
    else:
        denom = 2 * k * k + 2 * k * c - k
        a = (k - 1) * (2 * k + 2 * c) / denom
        b = (k + 2 * c) / denom
        raw = constant * k**a * N_target ** (-b)
        inv = _ceil_inverse(raw)
    if inv < 2:
        raise ParameterError(f"solved epsilon 1/{inv} is not below 1; increase N_target")
    if inv > MAX_INV_EPSILON:
        raise ParameterError(f"1/epsilon = {inv} overflows the supported range")
    return Fraction(1, inv)


def epsilon_for_base(n: int, k: int, constant: float = 1.0) -> Fraction:
    """Self-consistent epsilon for a base graph on n nodes.

    Iterates 1/eps <- ceil(1/solve_epsilon(4k n / eps)) from 1/eps = 2; the map
    is monotone so this converges to its least fixed point.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if k < 2 or constant <= 0:
        raise ParameterError("need k >= 2 and a positive constant")
    inv = 2
    for _ in range(10_000):
        N = 4 * k * inv * n
        nxt = max(2, _c0_inverse(N, k, constant))
        if nxt == inv:
            return Fraction(1, inv)
        inv = nxt
    raise ParameterError("epsilon fixed point did not converge")


def plan_from_target(N_target: int, k: int, c: int = 0, constant: float = 1.0) -> tuple[Fraction, int, int]:
    """(epsilon, n, N): epsilon from N_target, n = floor(eps * N_target / 4k), N = 4k n / eps."""
    eps = solve_epsilon(N_target, k, c, constant)
    n = (N_target * eps.numerator) // (4 * k * eps.denominator)
    if n < 1:
        raise ParameterError(f"N_target = {N_target} leaves no room for a single cluster")
    return eps, n, 4 * k * eps.denominator * n


def predicted_lightness(N, k: int, epsilon, constant: float = 1.0) -> float:
    """``constant * eps**(1/(k-1)) * N**(1/(k-1)) / k``."""
    if k < 2:
        raise ParameterError("k must be >= 2")
    e = 1.0 / (k - 1)
    return constant * float(epsilon) ** e * float(N) ** e / k


def expected_kill_bound(k: int, c: int, n, epsilon, constant: float = 1.0) -> float:
    """``constant * n**((k+2c)/(k-1)) * (constant*eps)**(2k+2c) / (2k+2c)!``."""
    if k < 2:
        raise ParameterError("k must be >= 2")
    L = 2 * k + 2 * c
    return constant * float(n) ** ((k + 2 * c) / (k - 1)) * (constant * float(epsilon)) ** L / math.factorial(L)


def kill_geometric_sum(k: int, epsilon) -> Fraction:
    """sum_{i=0}^{floor(k eps)} 4**-(i+1), which never exceeds 1/2."""
    top = math.floor(k * Fraction(epsilon))
    return sum((Fraction(1, 4 ** (i + 1)) for i in range(top + 1)), Fraction(0))


# ----------------------------------------------------------------------
# records


@dataclass(frozen=True)
class ConstructionParams:
    k: int
    epsilon: Fraction
    base: GirthGraph
    seed: Optional[int] = None
    constants: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_CONSTANTS))

    def __post_init__(self):
        if self.k < 2:
            raise ParameterError("k must be >= 2")
        object.__setattr__(self, "epsilon", as_epsilon(self.epsilon))
        if self.base.girth_parameter < self.k - 1:
            raise ParameterError(
                f"base girth parameter {self.base.girth_parameter} is below k-1 = {self.k - 1}"
            )
        if not self.base.is_bipartite:
            raise ParameterError("base graph must be bipartite")
        unknown = set(self.constants) - set(DEFAULT_CONSTANTS)
        if unknown:
            raise ParameterError(f"unknown constant {sorted(unknown)[0]!r}")


@dataclass(frozen=True)
class CycleLayout:
    """Cluster/spacer tiling of the spanning cycle and the node -> cluster bijection."""

    k: int
    inv_epsilon: int
    assignment: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.assignment) != list(range(len(self.assignment))):
            raise StructuralError("assignment must be a bijection onto clusters")

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def cluster_size(self) -> int:
        return self.k * self.inv_epsilon

    @property
    def spacer_size(self) -> int:
        return 3 * self.k * self.inv_epsilon

    @property
    def period(self) -> int:
        return self.cluster_size + self.spacer_size

    @property
    def N(self) -> int:
        return self.period * self.n

    @property
    def clusters(self) -> list[tuple[int, int]]:
        return [(i * self.period, i * self.period + self.cluster_size) for i in range(self.n)]

    @property
    def spacers(self) -> list[tuple[int, int]]:
        return [(i * self.period + self.cluster_size, (i + 1) * self.period) for i in range(self.n)]

    def cluster_of(self, position: int) -> Optional[int]:
        i, offset = divmod(position, self.period)
        return i if offset < self.cluster_size else None

    def cluster_start(self, node: int) -> int:
        """First spanning-cycle position of the cluster hosting base node ``node``."""
        return self.assignment[node] * self.period


@dataclass(frozen=True)
class EmbeddedInstance:
    """H' (``full_graph``) with its labels; ``graph`` is H, i.e. H' minus ``pruned``.

    Spanning-cycle edges are ids ``0..N-1`` (edge i joins i and i+1 mod N);
    ``embedded[j]`` is the H' id of base edge j, oriented so its first
    endpoint lies in the cluster of the base edge's first endpoint.
    """

    k: int
    epsilon: Fraction
    base_graph: WeightedGraph
    layout: CycleLayout
    full_graph: WeightedGraph
    embedded: tuple[int, ...]
    pruned: frozenset = frozenset()
    certificate: Optional[GirthCertificate] = field(default=None, compare=False)

    @classmethod
    def from_positions(cls, base_graph, layout, k, epsilon, endpoints) -> "EmbeddedInstance":
        eps = as_epsilon(epsilon)
        inv = eps.denominator
        N = layout.N
        edges = [(i, (i + 1) % N, 1) for i in range(N)]
        for j, (a, b) in enumerate(endpoints):
            e = base_graph.edges[j]
            for node, pos in ((e.u, a), (e.v, b)):
                start = layout.cluster_start(node)
                if not start <= pos < start + layout.cluster_size:
                    raise StructuralError(f"endpoint {pos} of base edge {j} is outside cluster of node {node}")
            edges.append((int(a), int(b), inv))
        if len(edges) - N != base_graph.edge_count:
            raise StructuralError("need exactly one endpoint pair per base edge")
        full = WeightedGraph(N, edges, allow_parallel=True)
        return cls(k, eps, base_graph, layout, full, tuple(range(N, N + base_graph.edge_count)))

    @property
    def N(self) -> int:
        return self.layout.N

    @property
    def inv_epsilon(self) -> int:
        return self.epsilon.denominator

    @property
    def sc_edges(self) -> range:
        return range(self.N)

    @property
    def threshold(self) -> Fraction:
        """(1 + eps) * 2k: the weighted girth H must exceed."""
        return (1 + self.epsilon) * 2 * self.k

    @cached_property
    def _h_view(self):
        keep = [i for i in range(self.full_graph.edge_count) if i not in self.pruned]
        return self.full_graph.with_edges(keep), tuple(keep)

    @property
    def graph(self) -> WeightedGraph:
        return self._h_view[0]

    @property
    def h_edge_origin(self) -> tuple[int, ...]:
        """H' edge id for each edge id of :attr:`graph`."""
        return self._h_view[1]

    def is_sc(self, full_edge_id: int) -> bool:
        return full_edge_id < self.N

    def image_endpoint(self, base_edge: int, node: int) -> int:
        """Endpoint of the image of ``base_edge`` that lies in the cluster of ``node``."""
        e = self.base_graph.edges[base_edge]
        h = self.full_graph.edges[self.embedded[base_edge]]
        if node == e.u:
            return h.u
        if node == e.v:
            return h.v
        raise StructuralError(f"node {node} is not an endpoint of base edge {base_edge}")

    def unpruned(self) -> "EmbeddedInstance":
        return replace(self, pruned=frozenset(), certificate=None)


# ----------------------------------------------------------------------
# construction steps


def build_layout(base: GirthGraph, k: int, epsilon, seed=None) -> CycleLayout:
    eps = as_epsilon(epsilon)
    rng = as_rng(seed)
    n = base.graph.node_count
    assignment = tuple(int(x) for x in rng.permutation(n))
    layout = CycleLayout(k, eps.denominator, assignment)
    assert layout.N == 4 * k * eps.denominator * n
    assert sum(b - a for a, b in layout.clusters + layout.spacers) == layout.N
    return layout


def embed_edges(base: GirthGraph, layout: CycleLayout, epsilon, seed=None) -> EmbeddedInstance:
    rng = as_rng(seed)
    g = base.graph
    draws = rng.integers(0, layout.cluster_size, size=(g.edge_count, 2))
    endpoints = [
        (layout.cluster_start(e.u) + int(draws[j, 0]), layout.cluster_start(e.v) + int(draws[j, 1]))
        for j, e in enumerate(g.edges)
    ]
    return EmbeddedInstance.from_positions(g, layout, layout.k, epsilon, endpoints)


def _sc_arc(p: int, q: int) -> list[int]:
    """SC edge ids walking from position p to position q inside one cluster."""
    if p <= q:
        return list(range(p, q))
    return list(range(p - 1, q - 1, -1))


def corresponding_cycle(inst: EmbeddedInstance, x: Cycle) -> tuple[Cycle, int]:
    """The H' cycle made of the images of x's edges joined by intra-cluster SC arcs.

    Returns the cycle and sigma, the number of SC edges it uses. Its
    normalized weight is ``len(x) + eps * sigma``.
    """
    checked = Cycle.from_edges(inst.base_graph, x.edges)
    nodes, edges = checked.nodes, checked.edges
    L = len(edges)
    seq: list[int] = []
    sigma = 0
    for i in range(L):
        seq.append(inst.embedded[edges[i]])
        here = nodes[(i + 1) % L]
        p = inst.image_endpoint(edges[i], here)
        q = inst.image_endpoint(edges[(i + 1) % L], here)
        arc = _sc_arc(p, q)
        sigma += len(arc)
        seq.extend(arc)
    return Cycle.from_edges(inst.full_graph, seq), sigma


def _sigma(inst: EmbeddedInstance, c: Cycle) -> int:
    nodes, edges = c.nodes, c.edges
    L = len(edges)
    return sum(
        abs(inst.image_endpoint(edges[i], nodes[(i + 1) % L]) - inst.image_endpoint(edges[(i + 1) % L], nodes[(i + 1) % L]))
        for i in range(L)
    )


def prune_light_cycles(inst: EmbeddedInstance, *, certify: bool = True) -> EmbeddedInstance:
    """Delete the heavy edges of every light corresponding cycle, then certify.

    Base cycles are scanned up to ``floor((1 + eps) * 2k)`` edges (only even
    lengths for a bipartite base); longer ones already exceed the threshold
    from their heavy edges alone. With ``certify`` the weighted girth of the
    result is recomputed from scratch and a :class:`CertificationError` is
    raised if it does not exceed the threshold.
    """
    k, inv = inst.k, inst.inv_epsilon
    base = inst.base_graph
    limit = 2 * k * (inv + 1)  # threshold * inv, an integer
    max_len = math.floor(inst.threshold)
    bipartite = base.bipartition() is not None
    pruned = set(inst.pruned)
    for L in range(2 if base.allow_parallel else 3, max_len + 1):
        if bipartite and L % 2:
            continue
        for c in enumerate_cycles(base, L, cap=max(12, max_len)):
            if L * inv + _sigma(inst, c) <= limit:
                pruned.update(inst.embedded[j] for j in c.edges)
    out = replace(inst, pruned=frozenset(pruned), certificate=None)
    if not certify:
        return out
    cert = weighted_girth(out.graph)
    if not cert.value > inst.threshold:
        origin = out.h_edge_origin
        witness_full = [origin[i] for i in cert.witness.edges]
        raise CertificationError(
            f"weighted girth {cert.value} does not exceed (1+eps)*2k = {inst.threshold}; "
            f"witness H' edges {witness_full}",
            witness=Cycle.from_edges(inst.full_graph, witness_full),
            value=cert.value,
        )
    return replace(out, certificate=cert)


def surviving_fraction(inst: EmbeddedInstance) -> Fraction:
    total = len(inst.embedded)
    if total == 0:
        raise ParameterError("surviving fraction is undefined without embedded edges")
    return Fraction(total - len(inst.pruned), total)


def run_construction(params: ConstructionParams, *, certify: bool = True) -> EmbeddedInstance:
    """Layout, embedding and pruning from one seeded stream."""
    rng = np.random.default_rng(params.seed)
    layout = build_layout(params.base, params.k, params.epsilon, rng)
    inst = embed_edges(params.base, layout, params.epsilon, rng)
    return prune_light_cycles(inst, certify=certify)


# ----------------------------------------------------------------------
# exhaustive diagnostics


def light_cycle_scan(inst: EmbeddedInstance, threshold=None) -> list[tuple[Cycle, int]]:
    """Every simple cycle of H' with normalized weight <= threshold, by brute force.

    Returns ``(cycle, heavy_edge_count)`` pairs. Independent of the
    corresponding-cycle machinery: a depth-first search over H' itself, with
    each cycle charged to its smallest heavy edge. Meant for small instances.
    """
    thr = inst.threshold if threshold is None else Fraction(threshold)
    g = inst.full_graph
    inv = inst.inv_epsilon
    N = inst.N
    out: list[tuple[Cycle, int]] = []
    if N >= 3 and N <= thr:
        out.append((Cycle.from_edges(g, list(range(N))), 0))
    adj = g._adj
    for hid in inst.embedded:
        e = g.edges[hid]
        budget = thr * inv - inv  # weight allowed besides e itself
        allowed = [
            tuple(t for t in row if t[1] != hid and not (t[1] >= N and t[1] < hid)) for row in adj
        ]
        d_all = _distances(allowed, e.u, budget)
        target = e.u
        on_path = {e.v}
        path: list[int] = []

        def walk(x, spent):
            for y, fid, w in allowed[x]:
                nxt = spent + w
                if nxt > budget:
                    continue
                if y == target:
                    yield [hid] + path + [fid]
                    continue
                if y in on_path or nxt + d_all.get(y, math.inf) > budget:
                    continue
                on_path.add(y)
                path.append(fid)
                yield from walk(y, nxt)
                path.pop()
                on_path.discard(y)

        for edges in walk(e.v, 0):
            c = Cycle.from_edges(g, edges)
            out.append((c, sum(1 for f in edges if f >= N)))
    return out


def _distances(adj, source, limit) -> dict[int, object]:
    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist.get(x, math.inf):
            continue
        for y, _, w in adj[x]:
            nd = d + w
            if nd <= limit and nd < dist.get(y, math.inf):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist
