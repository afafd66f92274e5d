"""Base graphs of certified girth, plus the bipartite / near-regular cleanup.

Generators return :class:`GirthGraph` records whose ``girth_parameter``
kappa certifies girth > 2*kappa. Graphs with at most
:data:`EXACT_GIRTH_CHECK_LIMIT` nodes are checked exactly at construction.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GenerationError, ParameterError, RegularizationError, StructuralError
from .graph import WeightedGraph, enumerate_cycles_through_edge, unweighted_girth

EXACT_GIRTH_CHECK_LIMIT = 200

__all__ = [
    "GirthGraph",
    "CycleCountReport",
    "gen_complete_bipartite",
    "gen_projective_plane_incidence",
    "gen_random_high_girth",
    "random_bipartition",
    "regularize",
    "count_cycles_per_edge",
    "GENERATORS",
]


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class GirthGraph:
    graph: WeightedGraph
    girth_parameter: int
    degree_band: Optional[tuple[int, int]] = None
    bipartition: Optional[tuple[int, ...]] = None
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        g = self.graph
        if self.girth_parameter < 1:
            raise ParameterError("girth_parameter must be >= 1")
        if g.node_count <= EXACT_GIRTH_CHECK_LIMIT:
            girth = unweighted_girth(g)
            if not girth > 2 * self.girth_parameter:
                raise StructuralError(
                    f"girth {girth} does not exceed 2*{self.girth_parameter}"
                )
        if self.degree_band is not None:
            lo, hi = self.degree_band
            bad = [x for x, d in enumerate(g.degrees()) if not lo <= d <= hi]
            if bad:
                raise StructuralError(f"node {bad[0]} has degree outside {self.degree_band}")
        if self.bipartition is not None:
            if len(self.bipartition) != g.node_count:
                raise StructuralError("bipartition length does not match node count")
            for e in g.edges:
                if self.bipartition[e.u] == self.bipartition[e.v]:
                    raise StructuralError(f"edge {e.id} lies inside one side of the bipartition")

    @property
    def n(self) -> int:
        return self.graph.node_count

    @property
    def is_bipartite(self) -> bool:
        return self.bipartition is not None or self.graph.bipartition() is not None


@dataclass(frozen=True)
class CycleCountReport:
    edge_id: int
    cycle_length: int
    count: int
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.count <= self.bound


# ----------------------------------------------------------------------
# generators


def gen_complete_bipartite(side: int) -> GirthGraph:
    """K_{side,side} with unit weights: left nodes 0..side-1, right nodes after."""
    if side < 2:
        raise ParameterError(f"biclique side must be >= 2, got {side}")
    edges = [(i, side + j) for i in range(side) for j in range(side)]
    g = WeightedGraph(2 * side, edges)
    return GirthGraph(
        g,
        girth_parameter=1,
        degree_band=(side, side),
        bipartition=tuple([0] * side + [1] * side),
        provenance={"generator": "biclique", "params": {"side": side}, "seed": None, "certified_girth": 4},
    )


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % p for p in range(2, math.isqrt(q) + 1))


def _projective_points(q: int) -> list[tuple[int, int, int]]:
    """Normalized homogeneous coordinates of PG(2, q): first nonzero entry is 1."""
    pts = [(1, y, z) for y in range(q) for z in range(q)]
    pts += [(0, 1, z) for z in range(q)]
    pts.append((0, 0, 1))
    return pts


def gen_projective_plane_incidence(q: int) -> GirthGraph:
    """Point-line incidence graph of PG(2, q) for prime q.

    Points are nodes ``0..P-1`` and lines ``P..2P-1`` with P = q^2 + q + 1;
    a point lies on a line when their coordinate dot product vanishes mod q.
    """
    if not _is_prime(q):
        raise ParameterError(f"q must be prime, got {q}")
    pts = _projective_points(q)
    P = len(pts)
    edges = []
    for i, p in enumerate(pts):
        for j, line in enumerate(pts):
            if (p[0] * line[0] + p[1] * line[1] + p[2] * line[2]) % q == 0:
                edges.append((i, P + j))
    assert P == q * q + q + 1 and len(edges) == (q + 1) * P
    g = WeightedGraph(2 * P, edges)
    return GirthGraph(
        g,
        girth_parameter=2,
        degree_band=(q + 1, q + 1),
        bipartition=tuple([0] * P + [1] * P),
        provenance={"generator": "pg2", "params": {"q": q}, "seed": None, "certified_girth": 6},
    )


def _short_cycle(adj: list[dict[int, int]], n: int, max_len: int) -> Optional[list[int]]:
    """Edge ids of some cycle with at most ``max_len`` edges, or None."""
    for root in range(n):
        if not adj[root]:
            continue
        dist = {root: 0}
        via: dict[int, tuple[int, int]] = {}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 > max_len:
                break
            for eid, y in adj[x].items():
                if x in via and via[x][1] == eid:
                    continue
                if y not in dist:
                    dist[y] = dist[x] + 1
                    via[y] = (x, eid)
                    queue.append(y)
                elif dist[x] + dist[y] + 1 <= max_len:
                    return _close_cycle(via, x, y, eid)
    return None


def _close_cycle(via, x, y, eid) -> list[int]:
    def chain(z):
        nodes, edges = [z], []
        while z in via:
            z, f = via[z]
            nodes.append(z)
            edges.append(f)
        return nodes, edges

    nx_, ex = chain(x)
    ny, ey = chain(y)
    # strip the shared tail (common ancestors) so the result is a simple cycle
    while len(nx_) > 1 and len(ny) > 1 and nx_[-2] == ny[-2]:
        nx_.pop()
        ny.pop()
        ex.pop()
        ey.pop()
    return ex + ey[::-1] + [eid]


def _random_tree_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform random labelled tree via a Pruefer sequence."""
    if n < 2:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [int(x) for x in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    a, b = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((a, b))
    return edges


def gen_random_high_girth(n: int, kappa: int, density_exponent: Optional[float] = None, seed=None) -> GirthGraph:
    """Random alteration: sample about n**density_exponent edges, then break every
    cycle of length <= 2*kappa by deleting one of its edges.

    The sample always contains a random spanning tree. Only edges lying on a
    short cycle are ever deleted and such edges are never bridges, so the
    output stays connected.
    """
    if kappa < 1:
        raise ParameterError("kappa must be >= 1")
    if n < 2:
        raise ParameterError("n must be >= 2")
    if density_exponent is None:
        density_exponent = 1 + 1 / (2 * kappa - 1)
    rng = as_rng(seed)
    max_edges = n * (n - 1) // 2
    target = min(max(n - 1, round(n ** density_exponent)), max_edges)

    chosen = dict.fromkeys(_random_tree_edges(n, rng))
    if len(chosen) < target:
        pool = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in chosen]
        picks = rng.choice(len(pool), size=target - len(chosen), replace=False)
        for p in sorted(int(x) for x in picks):
            chosen[pool[p]] = None
    pairs = sorted(chosen)

    adj: list[dict[int, int]] = [dict() for _ in range(n)]
    for eid, (u, v) in enumerate(pairs):
        adj[u][eid] = v
        adj[v][eid] = u
    alive = set(range(len(pairs)))
    deleted = 0
    while True:
        cyc = _short_cycle(adj, n, 2 * kappa)
        if cyc is None:
            break
        # drop the edge whose endpoints are best connected; ties by edge id
        victim = max(cyc, key=lambda f: (len(adj[pairs[f][0]]) + len(adj[pairs[f][1]]), -f))
        u, v = pairs[victim]
        del adj[u][victim]
        del adj[v][victim]
        alive.discard(victim)
        deleted += 1

    kept = [pairs[i] for i in sorted(alive)]
    g = WeightedGraph(n, kept)
    if not g.is_connected():
        raise GenerationError("random alteration produced a disconnected graph; lower density_exponent")
    if len(kept) < target / 2:
        raise GenerationError(
            f"only {len(kept)} of {target} sampled edges survived; lower density_exponent"
        )
    return GirthGraph(
        g,
        girth_parameter=kappa,
        bipartition=g.bipartition(),
        provenance={
            "generator": "random-alteration",
            "params": {"n": n, "kappa": kappa, "density_exponent": density_exponent},
            "seed": seed if not isinstance(seed, np.random.Generator) else None,
            "target_edges": target,
            "deleted_edges": deleted,
            "certified_girth": f">{2 * kappa}",
        },
    )


# ----------------------------------------------------------------------
# preprocessing


def random_bipartition(gg: GirthGraph, seed=None, coloring=None) -> GirthGraph:
    """Put each node on a uniformly random side and drop edges inside a side.

    A given ``coloring`` (one 0/1 entry per node) is used instead of a random one.
    """
    g = gg.graph
    if coloring is None:
        side = tuple(int(x) for x in as_rng(seed).integers(0, 2, size=g.node_count))
    else:
        side = tuple(int(x) for x in coloring)
        if len(side) != g.node_count or set(side) - {0, 1}:
            raise ParameterError("coloring needs one 0/1 entry per node")
    keep = [e.id for e in g.edges if side[e.u] != side[e.v]]
    out = g.with_edges(keep)
    prov = dict(gg.provenance)
    prov["bipartition_pass"] = {"deleted": g.edge_count - len(keep)}
    return GirthGraph(out, gg.girth_parameter, None, side, prov)


def regularize(
    gg: GirthGraph,
    seed=None,
    *,
    min_retention: float = 0.25,
    degree_scale: float = 2.0,
) -> GirthGraph:
    """Make ``gg`` bipartite and approximately regular.

    Non-bipartite input first goes through :func:`random_bipartition`. Then
    with d fixed once as ``degree_scale`` times the average degree, nodes of
    degree <= d/4 are deleted and nodes of degree >= d are split in two
    (incident edges alternate between the halves in edge-id order) until
    neither rule applies. Every surviving degree lies strictly inside
    (d/4, d).
    """
    g_in = gg.graph
    if g_in.edge_count == 0:
        raise ParameterError("regularize needs at least one edge")
    coloring = gg.bipartition or g_in.bipartition()
    trace: list[tuple] = []
    if coloring is None:
        gg = random_bipartition(gg, seed)
        coloring = gg.bipartition
        trace.append(("bipartition", g_in.edge_count - gg.graph.edge_count))
    g = gg.graph

    ends = {e.id: [e.u, e.v] for e in g.edges}
    inc: list[set[int]] = [set() for _ in range(g.node_count)]
    for e in g.edges:
        inc[e.u].add(e.id)
        inc[e.v].add(e.id)
    color = list(coloring)
    origin = list(range(g.node_count))
    parent: dict[int, int] = {}
    alive_nodes = set(range(g.node_count))

    d = degree_scale * 2 * g.edge_count / g.node_count
    low, high = d / 4, d

    while True:
        changed = False
        stack = sorted(x for x in alive_nodes if len(inc[x]) <= low)
        while stack:
            x = stack.pop()
            if x not in alive_nodes or len(inc[x]) > low:
                continue
            alive_nodes.discard(x)
            trace.append(("delete", x, len(inc[x])))
            for eid in inc[x]:
                a, b = ends.pop(eid)
                y = b if a == x else a
                inc[y].discard(eid)
                if len(inc[y]) <= low and y in alive_nodes:
                    stack.append(y)
            inc[x] = set()
            changed = True
        for x in sorted(x for x in alive_nodes if len(inc[x]) >= high):
            queue = [x]
            while queue:
                z = queue.pop()
                if len(inc[z]) < high:
                    continue
                twin = len(inc)
                moved = sorted(inc[z])[1::2]
                inc.append(set(moved))
                inc[z].difference_update(moved)
                for eid in moved:
                    pair = ends[eid]
                    pair[pair.index(z)] = twin
                color.append(color[z])
                origin.append(origin[z])
                parent[twin] = z
                alive_nodes.add(twin)
                trace.append(("split", z, twin))
                queue.extend([z, twin])
                changed = True
        if not changed:
            break

    order = sorted(alive_nodes)
    relabel = {x: i for i, x in enumerate(order)}
    out_edges = [(relabel[ends[eid][0]], relabel[ends[eid][1]]) for eid in sorted(ends)]
    out = WeightedGraph(len(order), out_edges)
    retention = out.edge_count / g_in.edge_count
    if retention < min_retention:
        raise RegularizationError(
            f"regularization kept {retention:.3f} of the edges (< {min_retention})", trace
        )
    band = (math.floor(low) + 1, math.ceil(high) - 1)
    prov = dict(gg.provenance)
    prov["regularize"] = {
        "seed": seed if not isinstance(seed, np.random.Generator) else None,
        "d": d,
        "retention": retention,
        "origin": [origin[x] for x in order],
        "split_parent": {relabel[c]: p for c, p in sorted(parent.items()) if c in relabel},
    }
    return GirthGraph(
        out,
        gg.girth_parameter,
        degree_band=band,
        bipartition=tuple(color[x] for x in order),
        provenance=prov,
    )


def count_cycles_per_edge(
    gg: GirthGraph,
    c: int,
    sample_edges: int,
    seed=None,
    *,
    constant: float = 1.0,
    cap: int = 12,
) -> list[CycleCountReport]:
    """Exact counts of (2(kappa+1) + 2c)-cycles through sampled edges.

    Each count is paired with the bound ``constant * n**((kappa + 2c + 1)/kappa)``.
    """
    kappa = gg.girth_parameter
    length = 2 * (kappa + 1) + 2 * c
    g = gg.graph
    n = g.node_count
    bound = constant * n ** ((kappa + 2 * (c + 1) - 1) / kappa)
    m = g.edge_count
    if m == 0:
        return []
    rng = as_rng(seed)
    size = min(sample_edges, m)
    picks = sorted(int(x) for x in rng.choice(m, size=size, replace=False))
    return [
        CycleCountReport(eid, length, len(enumerate_cycles_through_edge(g, eid, length, cap)), bound)
        for eid in picks
    ]


def _gen_random(n, kappa, density_exponent=None, seed=None):
    return gen_random_high_girth(int(n), int(kappa), density_exponent, seed)


GENERATORS = {
    "biclique": lambda side, seed=None: gen_complete_bipartite(int(side)),
    "pg2": lambda q, seed=None: gen_projective_plane_incidence(int(q)),
    "random-alteration": lambda n, kappa, density_exponent=None, seed=None: _gen_random(
        n, kappa, None if density_exponent is None else float(density_exponent), seed
    ),
}
