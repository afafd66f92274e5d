from fractions import Fraction

import numpy as np
import pytest

from oracles import gap_counts, light_probability_enumeration
from lightspan.harness.montecarlo import (
    cycle_base,
    embedded_light_count,
    exact_light_probability,
    probability_bound,
    run_point,
    sample_light_count,
    sigma_budget,
    wilson_interval,
)


@pytest.mark.parametrize("k,c,inv", [(2, 0, 1 + 1), (2, 0, 3)])
def test_exact_matches_enumeration(k, c, inv):
    assert exact_light_probability(k, c, Fraction(1, inv)) == light_probability_enumeration(k, c, inv)


def test_gap_distribution_formula():
    m = 7
    counts = gap_counts(m)
    assert counts[0] == m
    assert all(counts[j] == 2 * (m - j) for j in range(1, m))


def test_extra_length_makes_light_impossible():
    assert sigma_budget(2, 1, Fraction(1, 4)) < 0
    assert exact_light_probability(2, 1, Fraction(1, 4)) == 0
    assert sample_light_count(2, 1, Fraction(1, 4), 5000, seed=1) == 0
    assert run_point(2, 1, Fraction(1, 4), 2000, seed=1).hits == 0


def test_sampler_agrees_with_exact():
    eps = Fraction(1, 6)
    p = float(exact_light_probability(2, 0, eps))
    trials = 400_000
    hits = sample_light_count(2, 0, eps, trials, seed=3, chunk=50_000)
    sd = (p * (1 - p) / trials) ** 0.5
    assert abs(hits / trials - p) < 5 * sd


def test_embedded_path_agrees_with_exact():
    eps = Fraction(1, 2)
    p = float(exact_light_probability(2, 0, eps))
    trials = 3000
    hits = embedded_light_count(2, 0, eps, trials, seed=11)
    sd = (p * (1 - p) / trials) ** 0.5
    assert abs(hits / trials - p) < 5 * sd


def test_seeded_and_chunk_invariant_counts():
    a = sample_light_count(2, 0, Fraction(1, 4), 10_000, seed=np.random.default_rng(5), chunk=10_000)
    b = sample_light_count(2, 0, Fraction(1, 4), 10_000, seed=np.random.default_rng(5), chunk=10_000)
    assert a == b


def test_wilson_width_shrinks_by_root_two():
    w1 = np.subtract(*wilson_interval(500, 10_000)[::-1])
    w2 = np.subtract(*wilson_interval(1000, 20_000)[::-1])
    assert w1 / w2 == pytest.approx(2 ** 0.5, rel=0.02)


def test_bound_and_cycle_base():
    assert probability_bound(2, 0, Fraction(1, 8)) == pytest.approx(1 / 24)
    base = cycle_base(6)
    assert base.is_bipartite and base.girth_parameter == 2
    with pytest.raises(ValueError):
        run_point(2, 0, Fraction(1, 4), 999, seed=1)
