"""Exact weighted-graph substrate.

Weights are kept as Python ints whenever they are integral and as
:class:`fractions.Fraction` otherwise, so every comparison made by the
girth and spanner code is exact.
"""

from __future__ import annotations

import heapq
import math
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

from .errors import (
    BudgetError,
    ConnectivityError,
    ParameterError,
    StructuralError,
    SubgraphError,
)

Weight = Union[int, Fraction]
INF = math.inf
DEFAULT_CYCLE_CAP = 12

__all__ = [
    "Weight",
    "Edge",
    "WeightedGraph",
    "Cycle",
    "GirthCertificate",
    "as_weight",
    "normalized_weight",
    "mst_edges",
    "mst_weight",
    "lightness",
    "is_subgraph",
    "shortest_path_distance",
    "weighted_girth",
    "unweighted_girth",
    "enumerate_cycles_through_edge",
    "enumerate_cycles",
]


def as_weight(value) -> Weight:
    """Coerce ``value`` to an exact positive weight (int or Fraction)."""
    if isinstance(value, bool):
        raise StructuralError(f"invalid weight {value!r}")
    if isinstance(value, int):
        w: Weight = value
    elif isinstance(value, (Fraction, Rational)):
        w = Fraction(value)
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise StructuralError(f"weight must be finite, got {value!r}")
        w = Fraction(value)
    elif isinstance(value, str):
        w = Fraction(value)
    else:
        raise StructuralError(f"invalid weight {value!r}")
    if w <= 0:
        raise StructuralError(f"weight must be positive, got {value!r}")
    if isinstance(w, Fraction) and w.denominator == 1:
        w = w.numerator
    return w


class Edge(NamedTuple):
    u: int
    v: int
    weight: Weight
    id: int

    def other(self, x: int) -> int:
        if x == self.u:
            return self.v
        if x == self.v:
            return self.u
        raise StructuralError(f"node {x} is not an endpoint of edge {self.id}")

    @property
    def key(self) -> tuple[int, int, Weight]:
        """Orientation-free identity used for subgraph matching."""
        return (min(self.u, self.v), max(self.u, self.v), self.weight)


class WeightedGraph:
    """Immutable undirected graph with exact positive edge weights.

    Edge ids are positions in ``edges``. Parallel edges are rejected unless
    ``allow_parallel`` is set; self-loops are always rejected.
    """

    __slots__ = ("node_count", "edges", "allow_parallel", "integral", "_adj", "_total")

    def __init__(self, node_count: int, edges: Iterable = (), *, allow_parallel: bool = False):
        if node_count < 0:
            raise StructuralError("node_count must be nonnegative")
        built: list[Edge] = []
        adj: list[list[tuple[int, int, Weight]]] = [[] for _ in range(node_count)]
        seen: set[tuple[int, int]] = set()
        for item in edges:
            if len(item) == 2:
                u, v = item
                w: Weight = 1
            else:
                u, v, w = item[0], item[1], as_weight(item[2])
            u, v = int(u), int(v)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise StructuralError(f"edge ({u}, {v}) has an endpoint outside 0..{node_count - 1}")
            if u == v:
                raise StructuralError(f"self-loop at node {u}")
            pair = (min(u, v), max(u, v))
            if not allow_parallel:
                if pair in seen:
                    raise StructuralError(f"parallel edge {pair} while parallel edges are disabled")
                seen.add(pair)
            eid = len(built)
            built.append(Edge(u, v, w, eid))
            adj[u].append((v, eid, w))
            adj[v].append((u, eid, w))
        self.node_count = node_count
        self.edges: tuple[Edge, ...] = tuple(built)
        self.allow_parallel = allow_parallel
        self.integral = all(isinstance(e.weight, int) for e in built)
        self._adj = tuple(tuple(a) for a in adj)
        self._total: Optional[Weight] = None

    # -- accessors -----------------------------------------------------
    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge(self, eid: int) -> Edge:
        return self.edges[eid]

    def neighbors(self, u: int) -> tuple[tuple[int, int, Weight], ...]:
        """``(neighbor, edge_id, weight)`` triples incident to ``u``."""
        return self._adj[u]

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    def degrees(self) -> list[int]:
        return [len(a) for a in self._adj]

    @property
    def total_weight(self) -> Weight:
        if self._total is None:
            self._total = sum((e.weight for e in self.edges), 0)
        return self._total

    def is_unit_weight(self) -> bool:
        return all(e.weight == 1 for e in self.edges)

    def edge_keys(self) -> Counter:
        return Counter(e.key for e in self.edges)

    def with_edges(self, edge_ids: Iterable[int]) -> "WeightedGraph":
        """Subgraph on the same node set keeping ``edge_ids`` (renumbered in ascending id order)."""
        keep = sorted(set(edge_ids))
        return WeightedGraph(
            self.node_count,
            ((self.edges[i].u, self.edges[i].v, self.edges[i].weight) for i in keep),
            allow_parallel=self.allow_parallel,
        )

    def scaled(self, factor) -> "WeightedGraph":
        f = as_weight(factor)
        return WeightedGraph(
            self.node_count,
            ((e.u, e.v, e.weight * f) for e in self.edges),
            allow_parallel=self.allow_parallel,
        )

    def is_connected(self) -> bool:
        return _first_stranded(self) is None

    def bipartition(self) -> Optional[tuple[int, ...]]:
        """A proper 2-coloring, or None when the graph has an odd cycle."""
        color = [-1] * self.node_count
        for root in range(self.node_count):
            if color[root] >= 0:
                continue
            color[root] = 0
            queue = deque([root])
            while queue:
                x = queue.popleft()
                for y, _, _ in self._adj[x]:
                    if color[y] < 0:
                        color[y] = 1 - color[x]
                        queue.append(y)
                    elif color[y] == color[x]:
                        return None
        return tuple(color)

    # -- dunder --------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.allow_parallel == other.allow_parallel
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.node_count, self.edges))

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.node_count}, m={self.edge_count}, parallel={self.allow_parallel})"


@dataclass(frozen=True)
class Cycle:
    """A node-simple cycle: ``edges[i]`` joins ``nodes[i]`` and ``nodes[i + 1]`` (cyclically)."""

    nodes: tuple[int, ...]
    edges: tuple[int, ...]
    total_weight: Weight
    max_weight: Weight

    @classmethod
    def from_edges(cls, g: WeightedGraph, edge_ids: Sequence[int]) -> "Cycle":
        ids = tuple(int(i) for i in edge_ids)
        length = len(ids)
        min_len = 2 if g.allow_parallel else 3
        if length < min_len:
            raise StructuralError(f"a cycle needs at least {min_len} edges, got {length}")
        if len(set(ids)) != length:
            raise StructuralError("cycle repeats an edge")
        for i in ids:
            if not 0 <= i < g.edge_count:
                raise StructuralError(f"edge id {i} not in graph")
        e0, e1 = g.edges[ids[0]], g.edges[ids[1]]
        if length == 2:
            if {e0.u, e0.v} != {e1.u, e1.v}:
                raise StructuralError("2-cycle edges must join the same node pair")
            start = e0.u
        else:
            shared = {e0.u, e0.v} & {e1.u, e1.v}
            if len(shared) != 1:
                raise StructuralError(f"edges {ids[0]} and {ids[1]} do not share exactly one endpoint")
            start = e0.other(shared.pop())
        nodes = []
        cur = start
        for i in ids:
            nodes.append(cur)
            cur = g.edges[i].other(cur)
        if cur != start:
            raise StructuralError("edge sequence does not close into a cycle")
        if len(set(nodes)) != length:
            raise StructuralError("cycle revisits a node")
        weights = [g.edges[i].weight for i in ids]
        return cls(tuple(nodes), ids, sum(weights, 0), max(weights))

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def normalized_weight(self) -> Fraction:
        return Fraction(self.total_weight) / self.max_weight

    def canonical(self) -> "Cycle":
        """Smallest (nodes, edges) tuple over all rotations and both directions."""
        n, e = self.nodes, self.edges
        L = len(e)
        best = None
        rn = (n[0],) + tuple(reversed(n[1:]))
        re_ = tuple(reversed(e))
        for nodes, edges in ((n, e), (rn, re_)):
            for r in range(L):
                cand = (nodes[r:] + nodes[:r], edges[r:] + edges[:r])
                if best is None or cand < best:
                    best = cand
        return Cycle(best[0], best[1], self.total_weight, self.max_weight)


@dataclass(frozen=True)
class GirthCertificate:
    value: Union[Fraction, float]
    witness: Optional[Cycle] = None

    def exceeds(self, threshold) -> bool:
        return self.value > threshold


# ----------------------------------------------------------------------
# weights, MST, lightness


def normalized_weight(c: Cycle, g: WeightedGraph) -> Fraction:
    """w(C) / max edge weight of C, after re-validating C against g."""
    checked = Cycle.from_edges(g, c.edges)
    if set(checked.nodes) != set(c.nodes):
        raise StructuralError("cycle node sequence does not match its edges")
    return checked.normalized_weight


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def _first_stranded(g: WeightedGraph) -> Optional[int]:
    if g.node_count == 0:
        return None
    seen = [False] * g.node_count
    seen[0] = True
    stack = [0]
    while stack:
        x = stack.pop()
        for y, _, _ in g.neighbors(x):
            if not seen[y]:
                seen[y] = True
                stack.append(y)
    for i, s in enumerate(seen):
        if not s:
            return i
    return None


def mst_edges(g: WeightedGraph) -> tuple[int, ...]:
    """Kruskal's algorithm; ties broken by edge id."""
    stranded = _first_stranded(g)
    if stranded is not None:
        raise ConnectivityError(stranded)
    ds = _DisjointSet(g.node_count)
    chosen = []
    for e in sorted(g.edges, key=lambda e: (e.weight, e.id)):
        if ds.union(e.u, e.v):
            chosen.append(e.id)
            if len(chosen) == g.node_count - 1:
                break
    return tuple(sorted(chosen))


def mst_weight(g: WeightedGraph) -> Weight:
    return sum((g.edges[i].weight for i in mst_edges(g)), 0)


def is_subgraph(h: WeightedGraph, g: WeightedGraph) -> bool:
    if h.node_count > g.node_count:
        return False
    gk = g.edge_keys()
    return all(gk[k] >= c for k, c in h.edge_keys().items())


def lightness(h: WeightedGraph, g: Optional[WeightedGraph] = None) -> Fraction:
    """w(h) / w(mst(g)); ``lightness(h)`` is shorthand for ``lightness(h, h)``."""
    if g is None:
        g = h
    elif not is_subgraph(h, g):
        raise SubgraphError("h contains an edge absent from g")
    base = mst_weight(g)
    if base == 0:
        raise ParameterError("lightness is undefined for a graph whose MST is empty")
    return Fraction(h.total_weight) / base


# ----------------------------------------------------------------------
# shortest paths


def _dijkstra(adj, s, t, cap=None, excluded=None, limit=None):
    """Capped Dijkstra over an adjacency sequence of ``(nbr, eid, w)`` triples.

    Edges heavier than ``cap`` and the edge ``excluded`` are ignored; nodes
    farther than ``limit`` are never settled. Returns ``(dist_to_t, pred)``
    where ``pred[x] = (previous_node, edge_id)``.
    """
    if s == t:
        return 0, {}
    dist = {s: 0}
    pred: dict[int, tuple[int, int]] = {}
    done = set()
    heap = [(0, s)]
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        if x == t:
            return d, pred
        done.add(x)
        for y, eid, w in adj[x]:
            if eid == excluded or (cap is not None and w > cap) or y in done:
                continue
            nd = d + w
            if limit is not None and nd > limit:
                continue
            old = dist.get(y)
            if old is None or nd < old:
                dist[y] = nd
                pred[y] = (x, eid)
                heapq.heappush(heap, (nd, y))
    return INF, pred


def _path_edges(pred, s, t) -> list[int]:
    """Edge ids along the predecessor chain, ordered from t back to s."""
    out = []
    x = t
    while x != s:
        x, eid = pred[x]
        out.append(eid)
    return out


def _check_node(g: WeightedGraph, x: int) -> None:
    if not 0 <= x < g.node_count:
        raise StructuralError(f"node {x} not in graph")


def shortest_path_distance(
    g: WeightedGraph,
    s: int,
    t: int,
    weight_cap=None,
    excluded_edge: Optional[int] = None,
):
    """Exact s-t distance using edges of weight <= ``weight_cap``, skipping ``excluded_edge``.

    Returns ``math.inf`` when t is unreachable.
    """
    _check_node(g, s)
    _check_node(g, t)
    cap = None if weight_cap is None else as_weight(weight_cap)
    d, _ = _dijkstra(g._adj, s, t, cap, excluded_edge)
    return d


# ----------------------------------------------------------------------
# girth


def weighted_girth(g: WeightedGraph) -> GirthCertificate:
    """Minimum normalized weight over all cycles, with a witness.

    Every cycle has a heaviest edge e = (u, v); the lightest such cycle is e
    plus a shortest u-v path avoiding e that uses only edges no heavier than
    e. Scanning every edge as the candidate maximum is therefore exact.
    Heavier edges are scanned first so later searches can stop early.
    """
    best = INF
    witness = None
    adj = g._adj
    for e in sorted(g.edges, key=lambda e: (-e.weight, e.id)):
        w = e.weight
        limit = None if best == INF else (best - 1) * w
        if limit is not None and g.integral:
            limit = math.floor(limit)  # integer distances: same pruning, cheaper compares
        d, pred = _dijkstra(adj, e.u, e.v, cap=w, excluded=e.id, limit=limit)
        if d == INF:
            continue
        cand = Fraction(d + w) / w
        if cand < best:
            best = cand
            edges = [e.id] + _path_edges(pred, e.u, e.v)
            witness = Cycle.from_edges(g, edges)
    if witness is None:
        return GirthCertificate(INF, None)
    return GirthCertificate(best, witness)


def unweighted_girth(g: WeightedGraph):
    """Fewest edges in any cycle (``math.inf`` for forests); weights are ignored."""
    best = INF
    adj = g._adj
    n = g.node_count
    for root in range(n):
        dist = [-1] * n
        via = [-1] * n
        dist[root] = 0
        queue = deque([root])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y, eid, _ in adj[x]:
                if eid == via[x]:
                    continue
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    via[y] = eid
                    queue.append(y)
                else:
                    length = dist[x] + dist[y] + 1
                    if length < best:
                        best = length
    return best


def _bfs_distances(adj, source: int, n: int, excluded: int) -> list[int]:
    dist = [n + 1] * n
    dist[source] = 0
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y, eid, _ in adj[x]:
            if eid != excluded and dist[y] > dist[x] + 1:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def _cycles_through(g: WeightedGraph, eid: int, length: int) -> Iterator[list[int]]:
    e = g.edges[eid]
    u, v = e.u, e.v
    adj = g._adj
    to_u = _bfs_distances(adj, u, g.node_count, eid)
    if to_u[v] > length - 1:
        return
    on_path = {v}
    path: list[int] = []

    def walk(x: int, remaining: int):
        for y, fid, _ in adj[x]:
            if fid == eid:
                continue
            if remaining == 1:
                if y == u:
                    yield [eid] + path + [fid]
                continue
            if y == u or y in on_path or to_u[y] > remaining - 1:
                continue
            on_path.add(y)
            path.append(fid)
            yield from walk(y, remaining - 1)
            path.pop()
            on_path.discard(y)

    yield from walk(v, length - 1)


def enumerate_cycles_through_edge(
    g: WeightedGraph, e, exact_length: int, cap: int = DEFAULT_CYCLE_CAP
) -> list[Cycle]:
    """All node-simple cycles with exactly ``exact_length`` edges that contain edge ``e``.

    Cycles are canonicalized and returned in sorted order.
    """
    if exact_length > cap:
        raise BudgetError(f"cycle length {exact_length} exceeds enumeration cap {cap}")
    if isinstance(e, Edge):
        e = e.id
    if not 0 <= e < g.edge_count:
        raise StructuralError(f"edge id {e} not in graph")
    if exact_length < (2 if g.allow_parallel else 3):
        return []
    found = {}
    for edges in _cycles_through(g, e, exact_length):
        c = Cycle.from_edges(g, edges).canonical()
        found[(c.nodes, c.edges)] = c
    return [found[k] for k in sorted(found)]


def enumerate_cycles(g: WeightedGraph, exact_length: int, cap: int = DEFAULT_CYCLE_CAP) -> Iterator[Cycle]:
    """Every cycle of ``exact_length`` edges in g, each exactly once.

    A cycle is reported while scanning its smallest edge id.
    """
    if exact_length > cap:
        raise BudgetError(f"cycle length {exact_length} exceeds enumeration cap {cap}")
    if exact_length < (2 if g.allow_parallel else 3):
        return
    for e in range(g.edge_count):
        for edges in _cycles_through(g, e, exact_length):
            if min(edges) == e:
                yield Cycle.from_edges(g, edges)
