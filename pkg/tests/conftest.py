import sys
from fractions import Fraction
from pathlib import Path

from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from lightspan.graph import WeightedGraph  # noqa: E402

weights = st.builds(Fraction, st.integers(1, 12), st.integers(1, 4))


@st.composite
def graphs(draw, max_nodes=10, max_edges=20, min_nodes=1, weight=weights, connected=False):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if connected and n > 1:
        tree = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    else:
        tree = []
    rest = [p for p in pairs if p not in tree]
    room = max(0, min(max_edges - len(tree), len(rest)))
    extra = draw(st.lists(st.sampled_from(rest), unique=True, max_size=room)) if rest and room else []
    chosen = tree + extra
    order = draw(st.permutations(chosen))
    return WeightedGraph(n, [(u, v, draw(weight)) for u, v in order])
