import itertools
from dataclasses import replace
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tropgraph import generators as gen
from tropgraph.exact import INF
from tropgraph.functions import divisor_of, evaluate
from tropgraph.games import brute_force_mean_payoff
from tropgraph.gadgets import (CSPInstance, Feasible, GadgetError, Infeasible, complete_instance,
                               completion_profile, constraint_game, csp_feasibility,
                               csp_to_generalized, feasible_witness_check, lemma_assignments,
                               matrix_gadget, property_D_check, validate_csp, verify_dominion,
                               within_bound_boxes)
from tropgraph.graph import Interior, Vertex
from tropgraph.rank import dss_matrix_rank, troprank
from tropgraph.semimodule import slope_profile, two_slope_points

F = Fraction
seeds = st.integers(min_value=0, max_value=10**9)


def hand_infeasible():
    """c1 >= (c2 + c3)/2 with c2 >= 1 + c1 and c3 >= 1 + c1."""
    a = {(2, 1): 1, (3, 1): 1, (1, 2): -1, (1, 3): -1, (2, 3): -10, (3, 2): -10}
    return CSPInstance.make(3, [(1, 2, 3)], [], a)


# --------------------------------------------------------------------------
# validation and feasibility


def test_validate_examples():
    assert validate_csp(CSPInstance.make(2, a={(1, 2): 0, (2, 1): 0})).ok
    rep = validate_csp(CSPInstance.make(2, a={(1, 2): 1, (2, 1): 1}))
    assert any("trivially unsatisfiable" in e for e in rep.errors)
    rep = validate_csp(CSPInstance.make(3, [(1, 2, 2)], default_a=0))
    assert any("repeated indices" in e for e in rep.errors)
    assert any("missing" in e for e in validate_csp(CSPInstance.make(2, a={(1, 2): 0})).errors)


def test_witness_check_examples():
    zero = CSPInstance.make(3, default_a=0)
    assert feasible_witness_check(zero, (5, 5, 5))
    one = CSPInstance.make(3, [(1, 2, 3)], default_a=-10)
    assert feasible_witness_check(one, (0, 1, -1))
    assert not feasible_witness_check(one, (0, 1, 1))
    with pytest.raises(GadgetError):
        feasible_witness_check(zero, (0, 0))


def test_witness_check_grid_on_hand_infeasible():
    csp = hand_infeasible()
    grid = [F(k, 2) for k in range(-8, 9)]
    assert not any(feasible_witness_check(csp, c) for c in itertools.product(grid, repeat=3))


def test_feasibility_examples():
    v = csp_feasibility(CSPInstance.make(3, default_a=0))
    assert isinstance(v, Feasible) and len(set(v.c)) == 1
    v = csp_feasibility(hand_infeasible())
    assert isinstance(v, Infeasible)
    assert verify_dominion(constraint_game(hand_infeasible()), v.evidence)
    v = csp_feasibility(CSPInstance.make(3, [], [(1, 2, 3)], default_a=-5))
    assert isinstance(v, Feasible) and feasible_witness_check(CSPInstance.make(3, [], [(1, 2, 3)], default_a=-5), v.c)


def test_infeasibility_agrees_with_game_oracle():
    csp = hand_infeasible()
    assert max(brute_force_mean_payoff(constraint_game(csp))) > 0
    zero = CSPInstance.make(2, default_a=0)
    assert max(brute_force_mean_payoff(constraint_game(zero))) <= 0


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_generated_instances_are_decided_correctly(seed):
    rng = random.Random(seed)
    csp, c = gen.feasible_csp(rng, rng.randint(2, 5))
    assert feasible_witness_check(csp, c)
    v = csp_feasibility(csp)
    assert isinstance(v, Feasible) and feasible_witness_check(csp, v.c)
    bad = gen.infeasible_csp(rng)
    w = csp_feasibility(bad)
    assert isinstance(w, Infeasible) and verify_dominion(constraint_game(bad), w.evidence)


# --------------------------------------------------------------------------
# the generalized instance


def test_generalized_one_average():
    csp = CSPInstance.make(3, [(1, 2, 3)], default_a=-1)
    gi = csp_to_generalized(csp)
    assert gi.M == 2
    (e,) = gi.graph.edges
    assert e.length == 4
    f1, f2, f3 = gi.functions[:3]
    for x in (F(-2), F(-1, 3), F(0), F(3, 2), F(2)):
        p = Interior(e.id, x + 2) if -2 < x < 2 else None
        if p is None:
            continue
        assert evaluate(f1, p) == 0
        assert evaluate(f2, p) == -x
        assert evaluate(f3, p) == x
    idx = gi.family_index()
    fp, fm = gi.functions[idx["f+[1,2,3]"]], gi.functions[idx["f-[1,2,3]"]]
    assert evaluate(fp, Interior(e.id, 3)) == -1 and evaluate(fm, Interior(e.id, 3)) == 1


def test_generalized_difference_only():
    csp = CSPInstance.make(2, a={(1, 2): -3, (2, 1): 1})
    gi = csp_to_generalized(csp)
    assert gi.graph.edges == ()
    assert set(gi.graph.vertices) == {"w[1,2]", "w'[1,2]", "w[2,1]", "w'[2,1]"}
    f1, f2 = gi.functions[:2]
    assert evaluate(f1, Vertex("w[2,1]")) == 1 and evaluate(f1, Vertex("w'[2,1]")) == 1
    assert evaluate(f1, Vertex("w[1,2]")) == 0 and evaluate(f1, Vertex("w'[1,2]")) == INF
    assert evaluate(f2, Vertex("w[1,2]")) == -3


def test_generalized_minimum_vertices():
    csp = CSPInstance.make(3, [], [(1, 2, 3)], default_a=0)
    gi = csp_to_generalized(csp)
    f1, f2 = gi.functions[:2]
    assert evaluate(f1, Vertex("v[1,2,3]")) == 0 and evaluate(f1, Vertex("v'[1,2,3]")) == INF
    assert evaluate(f2, Vertex("v'[1,2,3]")) == 0
    g = gi.functions[gi.family_index()["g[1,2,3]"]]
    assert evaluate(g, Vertex("v[1,2,3]")) == 0 == evaluate(g, Vertex("v'[1,2,3]"))


def test_invalid_csp_rejected():
    with pytest.raises(GadgetError):
        csp_to_generalized(CSPInstance.make(2, a={(1, 2): 1, (2, 1): 1}))


# --------------------------------------------------------------------------
# completion


def test_completion_of_isolated_vertices():
    gi = csp_to_generalized(CSPInstance.make(2, default_a=0))
    ci = complete_instance(gi)
    assert len(ci.added_edges) == 6
    assert all(e.length == 2 for e in ci.graph.edges)
    assert ci.graph.connected


def test_completion_profile_interpolates():
    M = 2
    p = completion_profile("x", 0, 4 * M, M)
    assert p.value_at(0) == 0 and p.value_at(2) == 8
    assert p.slopes == (6, -6)
    t = p.breaks[1]
    assert 6 * t == 8 - 6 * (t - 2)
    # agrees with the lower envelope of the two lines at many offsets
    for k in range(41):
        s = F(k, 20)
        assert p.value_at(s) == min(6 * s, 8 - 6 * (s - 2))
    with pytest.raises(GadgetError):
        completion_profile("x", 0, 100, 1)


def test_completed_functions_stay_in_range():
    rng = random.Random(5)
    for _ in range(5):
        csp, _ = gen.feasible_csp(rng, 3)
        gi = csp_to_generalized(csp)
        ci = complete_instance(gi)
        M = gi.M
        for f in ci.functions:
            assert f.is_total
            for v in gi.graph.vertices:
                assert -M <= evaluate(f, Vertex(v)) <= 4 * M
            for eid in ci.added_edges:
                assert all(abs(s) <= 3 * M for s in f.profile(eid).slopes)
            assert divisor_of(f).degree == 0


# --------------------------------------------------------------------------
# Property D


def test_property_D_on_one_average():
    csp = CSPInstance.make(3, [(1, 2, 3)], default_a=-1)
    c = (1, 1, 0)
    assert feasible_witness_check(csp, c)
    vec = lemma_assignments(csp, c)
    assert within_bound_boxes(csp.M, vec)
    gi = csp_to_generalized(csp)
    assert property_D_check(gi, *vec.as_args())
    assert property_D_check(complete_instance(gi), *vec.as_args())


def test_property_D_fails_on_a_violated_point():
    csp = CSPInstance.make(3, [(1, 2, 3)], default_a=-1)
    vec = lemma_assignments(csp, (0, 2, 2))
    assert not property_D_check(csp_to_generalized(csp), *vec.as_args())


def test_property_D_length_checks():
    csp = CSPInstance.make(2, default_a=0)
    gi = csp_to_generalized(csp)
    with pytest.raises(GadgetError):
        property_D_check(gi, (0,), {}, {}, {}, {(1, 2): 0, (2, 1): 0})
    with pytest.raises(GadgetError):
        property_D_check(gi, (0, 0), {}, {}, {}, {(1, 2): 0})


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_feasible_round_trip(seed):
    rng = random.Random(seed)
    csp, c = gen.feasible_csp(rng, rng.randint(2, 4))
    vec = lemma_assignments(csp, c)
    assert within_bound_boxes(csp.M, vec)
    gi = csp_to_generalized(csp)
    assert property_D_check(gi, *vec.as_args())
    assert property_D_check(complete_instance(gi), *vec.as_args())


# --------------------------------------------------------------------------
# the matrix gadget


def test_matrix_gadget_example():
    mg = matrix_gadget([[0, 1], [1, 0]])
    (e,) = mg.graph.edges
    assert e.length == 2
    f1, f2 = mg.module.generators
    pts = [Vertex("v1"), Interior(e.id, 1), Vertex("v2")]
    assert [evaluate(f1, p) for p in pts] == [0, 0, 1]
    assert [evaluate(f2, p) for p in pts] == [1, 0, 0]
    assert mg.B.rows == ((0, 1), (1, 0), (0, 0))
    assert dss_matrix_rank(mg.B.rows) == 2 == dss_matrix_rank([[0, 1], [1, 0]])


def test_matrix_gadget_zero_matrix():
    mg = matrix_gadget([[0, 0], [0, 0]])
    assert troprank(mg.module).exact == 1


def test_matrix_gadget_rejects_bad_entries():
    for A in ([[0, 2], [1, 0]], [[0, 1]], [[0, 1], [1]]):
        with pytest.raises(GadgetError):
            matrix_gadget(A)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(1, 4), st.data())
def test_matrix_gadget_structure(m, n, data):
    A = [[data.draw(st.integers(0, 1)) for _ in range(n)] for _ in range(m)]
    mg = matrix_gadget(A)
    for slopes in slope_profile(mg.module).as_dict().values():
        assert slopes <= {-1, 0, 1} and len(slopes) <= 2
    pts = two_slope_points(mg.module)
    verts = {Vertex(v) for v in mg.graph.vertices}
    mids = {Interior(e.id, 1) for e in mg.graph.edges}
    assert verts <= set(pts) <= verts | mids
    rows = set(mg.B.rows)
    assert {tuple(r) for r in A} <= rows
    assert dss_matrix_rank(mg.B.rows) == dss_matrix_rank(A)


def test_dominion_verification_rejects_tampering():
    csp = hand_infeasible()
    G = constraint_game(csp)
    ev = csp_feasibility(csp).evidence
    assert not verify_dominion(G, replace(ev, c=tuple(0 for _ in ev.c)))
    assert not verify_dominion(G, replace(ev, states=()))
