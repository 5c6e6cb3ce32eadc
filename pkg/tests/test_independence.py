import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import linear, unit_edge
from oracles import sup_min_envelope
from tropgraph import generators as gen
from tropgraph.functions import FunctionError, constant, min_attained_twice, shift, trop_min
from tropgraph.games import GameCertificate, apply_shapley, verify_certificate
from tropgraph.graph import Interior, MetricGraph, Vertex
from tropgraph.independence import (Dependent, Independent, IndependenceError, ReductionGame,
                                    build_game, check_independence, extract_witness_points,
                                    game_segment_mismatch, segment_sup, sup_min_on_interval,
                                    unique_permutation_check)

F = Fraction
seeds = st.integers(min_value=0, max_value=10**9)


# --------------------------------------------------------------------------
# the inner optimization


def test_sup_min_examples():
    r = sup_min_on_interval([(1, 0), (-1, 0)], -1, 1)
    assert (r.value, r.argmax) == (0, 0)
    r = sup_min_on_interval([(2, 1)], 0, 3)
    assert (r.value, r.argmax) == (7, 3)
    r = sup_min_on_interval([(0, 5), (-1, 10)], 0, 3)
    assert r.value == 5


def test_sup_min_argmax_attains_value():
    r = sup_min_on_interval([(3, 0), (-2, 1), (0, F(1, 3))], 0, 1)
    assert min(g * r.argmax + d for g, d in [(3, 0), (-2, 1), (0, F(1, 3))]) == r.value


def test_sup_min_rejects_empty_and_reversed():
    with pytest.raises(ValueError):
        sup_min_on_interval([], 0, 1)
    with pytest.raises(ValueError):
        sup_min_on_interval([(1, 0)], 1, 0)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.fractions(-20, 20, max_denominator=20)), min_size=1, max_size=6),
       st.fractions(-10, 10, max_denominator=20), st.fractions(0, 10, max_denominator=20))
def test_sup_min_matches_envelope_oracle(terms, u, w):
    v = u + w
    assert sup_min_on_interval(terms, u, v).value == sup_min_envelope(terms, u, v)


# --------------------------------------------------------------------------
# the game


def test_game_of_zero_and_x(zero_x):
    G = build_game(zero_x)
    assert G.n == 2 and len(G.segments) == 1
    (a1,), = G.max_actions(0)
    (a2,), = G.max_actions(1)
    assert (a1.payoff, a1.transitions) == (1, ((1, 1),))
    assert (a2.payoff, a2.transitions) == (0, ((0, 1),))
    assert apply_shapley(G, (0, 0)) == (1, 0)


def test_game_of_identical_functions():
    g = unit_edge()
    G = build_game([constant(g, 0), constant(g, 0)])
    for c in [(0, 0), (F(3), F(-1))]:
        assert G.apply(c) == (c[1], c[0])


def test_game_of_three_lines_matches_direct_sup():
    g = unit_edge()
    G = build_game([constant(g, 0), linear(g, 1), linear(g, 2)])
    rng = random.Random(3)
    for _ in range(100):
        c = gen.random_vector(rng, 3)
        assert game_segment_mismatch(G, c) is None
        assert G.apply(c) == StochGameView(G).apply(c)


class StochGameView:
    """The same game through the generic max-min evaluation over its action table."""

    def __init__(self, G):
        self.G = G

    def apply(self, c):
        G = self.G
        return tuple(max(min(a.value(c) for a in bs) for bs in G.max_actions(i)) for i in range(G.n))


def test_provenance_records_where_actions_come_from(zero_x):
    G = build_game(zero_x)
    (tag1,), = G.provenance(0)
    assert tag1.kind == "plus" and tag1.j == 1


def test_game_needs_total_functions_on_connected_graph():
    g = MetricGraph.build(["a", "b"], [])
    with pytest.raises(IndependenceError):
        ReductionGame([constant(g, 0), constant(g, 1)])
    with pytest.raises(IndependenceError):
        ReductionGame([constant(unit_edge(), 0)])


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_fast_operator_matches_action_table(seed):
    rng = random.Random(seed)
    fs = gen.random_family(rng, rng.randint(2, 4), gen.random_graph(rng, 3, 3), 3)
    G = ReductionGame(fs)
    for _ in range(4):
        c = gen.random_vector(rng, G.n)
        assert G.apply(c) == StochGameView(G).apply(c)
        assert game_segment_mismatch(G, c) is None


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_cheap_positivity_check_is_sound(seed):
    rng = random.Random(seed)
    fs = gen.random_family(rng, rng.randint(2, 4), gen.random_graph(rng, 3, 3), 3)
    G = ReductionGame(fs)
    c = gen.random_vector(rng, G.n)
    if G.certify_positive(c):
        assert all(t > x for t, x in zip(G.apply(c), c))


# --------------------------------------------------------------------------
# verdicts


def test_zero_and_x_is_independent(zero_x):
    v = check_independence(zero_x)
    assert isinstance(v, Independent)
    lo, hi = v.rho_bounds
    assert lo <= F(1, 2) <= hi
    assert v.points == (Vertex("v"), Vertex("u"))
    assert v.permutation == (0, 1)


def test_constructed_dependence():
    g = unit_edge()
    fs = [constant(g, 0), linear(g, 1), trop_min(constant(g, 0), linear(g, 1, F(-1, 2)))]
    v = check_independence(fs)
    assert isinstance(v, Dependent)
    assert min_attained_twice(fs, v.coefficients).ok
    assert v.rho_bounds == (0, 0)


def test_shifted_copies_are_dependent():
    g = unit_edge(3)
    f = linear(g, 2, 1)
    v = check_independence([f, shift(f, 5), shift(f, F(-2, 3))])
    assert isinstance(v, Dependent)
    assert min_attained_twice([f, shift(f, 5), shift(f, F(-2, 3))], v.coefficients).ok


def test_three_lines_are_independent():
    g = unit_edge()
    fs = [constant(g, 0), linear(g, 1), linear(g, 2)]
    v = check_independence(fs)
    assert isinstance(v, Independent)
    assert unique_permutation_check(fs, v.points)[0]


def test_extracted_points_for_zero_and_x(zero_x):
    assert extract_witness_points(zero_x, (F(1, 2), 0)) == [Vertex("v"), Vertex("u")]
    swapped = [zero_x[1], zero_x[0]]
    assert extract_witness_points(swapped, (0, F(1, 2))) == [Vertex("u"), Vertex("v")]


def test_extraction_rejects_non_certificates(zero_x):
    with pytest.raises(IndependenceError):
        extract_witness_points(zero_x, (0, 0))


def test_unique_permutation_examples(zero_x):
    ok, perms = unique_permutation_check(zero_x, [Vertex("v"), Vertex("u")])
    assert ok and perms[0] == (0, 1)
    g = unit_edge()
    same = [linear(g, 1)] * 3
    ok, _ = unique_permutation_check(same, [Vertex("u"), Interior("e", F(1, 2)), Vertex("v")])
    assert not ok


def test_unique_permutation_size_limit():
    g = unit_edge()
    with pytest.raises(IndependenceError):
        unique_permutation_check([constant(g, k) for k in range(10)], [Vertex("u")] * 10)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_verdict_is_invariant_under_shifts(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 3)
    fs = gen.independent_family(rng, n) if rng.random() < 0.5 else gen.dependent_family(rng, n)
    v = check_independence(fs)
    moved = [shift(f, F(rng.randint(-9, 9), rng.randint(1, 4))) for f in fs]
    w = check_independence(moved)
    assert v.kind == w.kind


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_distinct_slopes_at_a_point_give_independence(seed):
    rng = random.Random(seed)
    fs = gen.independent_family(rng, rng.randint(2, 4))
    v = check_independence(fs)
    assert isinstance(v, Independent)
    assert verify_certificate(build_game(fs), v.certificate)


def test_segment_sup_matches_lemma_for_zero_and_x(zero_x):
    G = build_game(zero_x)
    r = segment_sup(G, 0, 0, (0, 0))
    assert r.value == 1 and r.argmax == 1


def test_certificate_kind_for_dependent_is_sub():
    g = unit_edge()
    v = check_independence([constant(g, 0), constant(g, 0)])
    assert isinstance(v, Dependent)
    assert v.certificate.kind in ("sub", "eigenpair")
    assert verify_certificate(build_game([constant(g, 0), constant(g, 0)]), v.certificate)


def test_functions_on_different_graphs_rejected():
    with pytest.raises((IndependenceError, FunctionError)):
        check_independence([constant(unit_edge(), 0), constant(unit_edge(2), 0)])


def test_certificate_object_roundtrip(zero_x):
    G = build_game(zero_x)
    cert = GameCertificate("strict_super", (F(1), F(1, 2)))
    assert verify_certificate(G, cert)
