"""Plain-text file formats.

Edge list (``*.edges``)::

    n m
    u v w_num w_den        # one line per edge, in edge-id order

Instance layout sidecar (``*.layout``): one ``key value...`` line per field::

    format lightspan-layout 1
    stage embedded|pruned
    k 2
    epsilon 1/8
    N 192
    n 6
    cluster_size 16
    spacer_size 48
    clusters 0:16 64:80 ...       # half-open spanning-cycle intervals
    spacers 16:64 80:128 ...
    assignment 3 0 5 1 2 4        # cluster index of each base node
    sc_edges 0:192
    embedded 192 193 ...          # H' edge id of each base edge
    pruned 195 200                # deleted H' edge ids
    pruned_edge 195 17 70         # endpoints of each deleted edge

For stage ``pruned`` the companion edge list holds H, the surviving edges in
ascending H' id order; deleted edges are restored from ``pruned_edge`` lines.
The base graph is recovered from the embedded endpoints and the assignment.

Spanner metrics sidecar (``*.metrics``) holds ``stretch``, ``edge_count``,
``lightness``, ``girth`` (exact fractions) and the ``kept`` edge ids.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Union

from .construction import CycleLayout, EmbeddedInstance, as_epsilon
from .errors import StructuralError
from .girth_graphs import GirthGraph
from .graph import WeightedGraph
from .spanners import SpannerResult

PathLike = Union[str, os.PathLike]
LAYOUT_FORMAT = "lightspan-layout 1"


def _frac(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def format_edge_list(g: WeightedGraph) -> str:
    lines = [f"{g.node_count} {g.edge_count}"]
    for e in g.edges:
        w = Fraction(e.weight)
        lines.append(f"{e.u} {e.v} {w.numerator} {w.denominator}")
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str, *, allow_parallel: bool = False) -> WeightedGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise StructuralError("edge list must start with a 'n m' header")
    n, m = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != m:
        raise StructuralError(f"header announces {m} edges but {len(body)} follow")
    edges = []
    for i, r in enumerate(body, start=2):
        if len(r) != 4:
            raise StructuralError(f"line {i}: expected 'u v w_num w_den'")
        edges.append((int(r[0]), int(r[1]), Fraction(int(r[2]), int(r[3]))))
    return WeightedGraph(n, edges, allow_parallel=allow_parallel)


def write_edge_list(g: WeightedGraph, path: PathLike) -> None:
    Path(path).write_text(format_edge_list(g))


def read_edge_list(path: PathLike, *, allow_parallel: bool = False) -> WeightedGraph:
    return parse_edge_list(Path(path).read_text(), allow_parallel=allow_parallel)


# ----------------------------------------------------------------------
# base graphs


def write_girth_graph(gg: GirthGraph, edges_path: PathLike, sidecar_path: PathLike) -> None:
    write_edge_list(gg.graph, edges_path)
    meta = dict(gg.provenance)
    meta.update(
        {
            "girth_parameter": gg.girth_parameter,
            "degree_band": list(gg.degree_band) if gg.degree_band else None,
            "bipartition": list(gg.bipartition) if gg.bipartition is not None else None,
        }
    )
    Path(sidecar_path).write_text(json.dumps(meta, sort_keys=True, indent=2, default=str) + "\n")


def read_girth_graph(edges_path: PathLike, sidecar_path: PathLike) -> GirthGraph:
    g = read_edge_list(edges_path)
    meta = json.loads(Path(sidecar_path).read_text())
    band = meta.pop("degree_band", None)
    bip = meta.pop("bipartition", None)
    kappa = meta.pop("girth_parameter")
    return GirthGraph(g, kappa, tuple(band) if band else None, tuple(bip) if bip is not None else None, meta)


# ----------------------------------------------------------------------
# instances


def _intervals(pairs) -> str:
    return " ".join(f"{a}:{b}" for a, b in pairs)


def format_layout(inst: EmbeddedInstance, stage: str) -> str:
    lay = inst.layout
    lines = [
        f"format {LAYOUT_FORMAT}",
        f"stage {stage}",
        f"k {inst.k}",
        f"epsilon {_frac(inst.epsilon)}",
        f"N {lay.N}",
        f"n {lay.n}",
        f"cluster_size {lay.cluster_size}",
        f"spacer_size {lay.spacer_size}",
        f"clusters {_intervals(lay.clusters)}".rstrip(),
        f"spacers {_intervals(lay.spacers)}".rstrip(),
        f"assignment {' '.join(map(str, lay.assignment))}".rstrip(),
        f"sc_edges 0:{lay.N}",
        f"embedded {' '.join(map(str, inst.embedded))}".rstrip(),
        f"pruned {' '.join(map(str, sorted(inst.pruned)))}".rstrip(),
    ]
    for hid in sorted(inst.pruned):
        e = inst.full_graph.edges[hid]
        lines.append(f"pruned_edge {hid} {e.u} {e.v}")
    return "\n".join(lines) + "\n"


def write_instance(inst: EmbeddedInstance, edges_path: PathLike, layout_path: PathLike, *, stage: str = None) -> None:
    """Write H' (stage ``embedded``) or H (stage ``pruned``) plus its layout sidecar."""
    if stage is None:
        stage = "pruned" if inst.pruned or inst.certificate is not None else "embedded"
    if stage not in ("embedded", "pruned"):
        raise ValueError(f"unknown stage {stage!r}")
    if stage == "embedded":
        inst = inst.unpruned()
    g = inst.full_graph if stage == "embedded" else inst.graph
    write_edge_list(g, edges_path)
    Path(layout_path).write_text(format_layout(inst, stage))


def parse_layout(text: str) -> dict:
    fields: dict = {"pruned_edge": []}
    for ln in text.splitlines():
        if not ln.strip() or ln.startswith("#"):
            continue
        key, _, rest = ln.partition(" ")
        if key == "pruned_edge":
            fields["pruned_edge"].append(tuple(int(x) for x in rest.split()))
        else:
            fields[key] = rest.strip()
    if fields.get("format") != LAYOUT_FORMAT:
        raise StructuralError(f"unsupported layout format {fields.get('format')!r}")
    return fields


def read_instance(edges_path: PathLike, layout_path: PathLike) -> EmbeddedInstance:
    f = parse_layout(Path(layout_path).read_text())
    k = int(f["k"])
    eps = as_epsilon(f["epsilon"])
    inv = eps.denominator
    assignment = tuple(int(x) for x in f["assignment"].split())
    layout = CycleLayout(k, inv, assignment)
    if layout.N != int(f["N"]):
        raise StructuralError("layout N does not match k, epsilon and n")
    embedded = tuple(int(x) for x in f["embedded"].split())
    pruned = frozenset(int(x) for x in f.get("pruned", "").split())
    g = read_edge_list(edges_path, allow_parallel=True)
    if f["stage"] == "pruned":
        restored = {hid: (a, b, inv) for hid, a, b in f["pruned_edge"]}
        if set(restored) != pruned:
            raise StructuralError("pruned ids and pruned_edge lines disagree")
        survivors = iter((e.u, e.v, e.weight) for e in g.edges)
        total = g.edge_count + len(restored)
        full_edges = [restored[i] if i in restored else next(survivors) for i in range(total)]
        full = WeightedGraph(g.node_count, full_edges, allow_parallel=True)
    else:
        full = g
    cluster_owner = {c: v for v, c in enumerate(assignment)}
    base_edges = []
    for hid in embedded:
        e = full.edges[hid]
        cu, cv = layout.cluster_of(e.u), layout.cluster_of(e.v)
        if cu is None or cv is None:
            raise StructuralError(f"embedded edge {hid} has an endpoint outside every cluster")
        base_edges.append((cluster_owner[cu], cluster_owner[cv]))
    base = WeightedGraph(len(assignment), base_edges, allow_parallel=True)
    if len(set(tuple(sorted(p)) for p in base_edges)) == len(base_edges):
        base = WeightedGraph(len(assignment), base_edges)
    return EmbeddedInstance(k, eps, base, layout, full, embedded, pruned)


# ----------------------------------------------------------------------
# spanners


def write_spanner(res: SpannerResult, edges_path: PathLike, metrics_path: PathLike) -> None:
    write_edge_list(res.spanner, edges_path)
    girth = res.girth_certificate.value
    lines = [
        f"stretch {_frac(res.stretch_t)}",
        f"edge_count {res.edge_count}",
        f"lightness {_frac(res.lightness_value)}",
        f"girth {'inf' if girth == float('inf') else _frac(girth)}",
        f"kept {' '.join(map(str, res.kept))}".rstrip(),
    ]
    Path(metrics_path).write_text("\n".join(lines) + "\n")


def read_spanner_metrics(metrics_path: PathLike) -> dict:
    out = {}
    for ln in Path(metrics_path).read_text().splitlines():
        key, _, rest = ln.partition(" ")
        if key == "kept":
            out[key] = tuple(int(x) for x in rest.split())
        elif key == "edge_count":
            out[key] = int(rest)
        elif rest == "inf":
            out[key] = float("inf")
        else:
            out[key] = Fraction(rest)
    return out
