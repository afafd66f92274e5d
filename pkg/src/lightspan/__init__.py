"""Weighted lower-bound instances for light spanners, with exact certification."""

from .construction import (
    ConstructionParams,
    CycleLayout,
    EmbeddedInstance,
    corresponding_cycle,
    epsilon_for_base,
    prune_light_cycles,
    run_construction,
    solve_epsilon,
    surviving_fraction,
)
from .errors import *  # noqa: F401,F403
from .girth_graphs import (
    GirthGraph,
    count_cycles_per_edge,
    gen_complete_bipartite,
    gen_projective_plane_incidence,
    gen_random_high_girth,
    regularize,
)
from .graph import (
    Cycle,
    Edge,
    GirthCertificate,
    WeightedGraph,
    lightness,
    mst_edges,
    mst_weight,
    normalized_weight,
    weighted_girth,
)
from .spanners import SpannerResult, greedy_spanner, unweighted_greedy_spanner, verify_stretch

__version__ = "0.1.0"
