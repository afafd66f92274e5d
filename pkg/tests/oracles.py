"""Brute-force references that share no code with the library algorithms."""

from __future__ import annotations

import itertools
from fractions import Fraction

INF = float("inf")


def raw_edges(g):
    return [(e.u, e.v, Fraction(e.weight), e.id) for e in g.edges]


def all_simple_cycles(n, edges, max_len=None):
    """Every simple cycle (optionally of at most ``max_len`` edges) as a frozenset of edge ids.

    Depth-first over node sequences starting at each cycle's smallest node;
    parallel edges and 2-cycles are handled by walking edge ids.
    """
    inc = [[] for _ in range(n)]
    for u, v, w, i in edges:
        inc[u].append((v, i))
        inc[v].append((u, i))
    found = set()

    def walk(start, x, seen_nodes, used):
        for y, i in inc[x]:
            if i in used:
                continue
            if max_len is not None and len(used) >= max_len:
                return
            if y == start and len(used) >= 1:
                found.add(frozenset(used + [i]))
            elif y > start and y not in seen_nodes:
                walk(start, y, seen_nodes | {y}, used + [i])

    for s in range(n):
        walk(s, s, {s}, [])
    return found


def min_normalized_weight(n, edges):
    w = {i: wt for _, _, wt, i in edges}
    best = INF
    for cyc in all_simple_cycles(n, edges):
        val = Fraction(sum(w[i] for i in cyc)) / max(w[i] for i in cyc)
        best = min(best, val)
    return best


def min_cycle_length(n, edges):
    cycles = all_simple_cycles(n, edges)
    return min((len(c) for c in cycles), default=INF)


def floyd(n, edges):
    d = [[INF] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
    for u, v, w, _ in edges:
        if w < d[u][v]:
            d[u][v] = d[v][u] = w
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == INF:
                continue
            di = d[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return d


def _acyclic_spanning(n, chosen):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for u, v, _, _ in chosen:
        a, b = find(u), find(v)
        if a == b:
            return False
        parent[a] = b
    return True


def mst_weight_bruteforce(n, edges):
    """Minimum total weight over every (n-1)-edge acyclic subset."""
    best = None
    for combo in itertools.combinations(edges, n - 1):
        if _acyclic_spanning(n, combo):
            w = sum(e[2] for e in combo)
            if best is None or w < best:
                best = w
    return best


def cycles_of_length(n, edges, length):
    return {c for c in all_simple_cycles(n, edges, length) if len(c) == length}


def is_bipartite_bruteforce(n, edges):
    for mask in range(1 << max(n - 1, 0)):
        side = [(mask >> i) & 1 for i in range(n - 1)] + [0]
        if all(side[u] != side[v] for u, v, _, _ in edges):
            return True
    return False


def gap_counts(m):
    """Counts of |a - b| over all m^2 ordered pairs, by direct enumeration."""
    out = [0] * m
    for a in range(m):
        for b in range(m):
            out[abs(a - b)] += 1
    return out


def light_probability_enumeration(k, c, inv):
    """P(sum of L gaps <= 2k - 2c inv) by enumerating every position vector."""
    m, L = k * inv, 2 * k + 2 * c
    budget = 2 * k - 2 * c * inv
    hits = 0
    total = 0
    for pos in itertools.product(range(m), repeat=2 * L):
        total += 1
        s = sum(abs(pos[2 * i] - pos[2 * i + 1]) for i in range(L))
        hits += s <= budget
    return Fraction(hits, total)
