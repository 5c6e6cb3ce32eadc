import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tropgraph import generators as gen
from tropgraph.games import (GameCertificate, GameError, MinAction, OracleCapExceeded, StochGame,
                             apply_shapley, brute_force_mean_payoff, decide_sign,
                             escape_rate_bounds, hilbert_seminorm, strategy_iteration,
                             value_iteration, verify_certificate)
from tropgraph.linalg import (SingularSystem, chain_gain_bias, recurrent_classes, solve,
                              strongly_connected_components)

F = Fraction
seeds = st.integers(min_value=0, max_value=10**9)


def loop(payoff):
    return StochGame.build([[[(payoff, [(0, 1)])]]])


def zero_x_game():
    """The game of {0, x} on the unit edge: T(c) = (1 + c_2, c_1)."""
    return StochGame.build([[[(1, [(1, 1)])]], [[(0, [(0, 1)])]]])


def zero_game(n=2):
    return StochGame.build([[[(0, [(i, 1)])]] for i in range(n)])


# --------------------------------------------------------------------------
# exact linear algebra


def test_solve_exact_and_rank_deficient():
    assert solve([[2, 1], [1, 3]], [3, 5]) == [F(4, 5), F(7, 5)]
    x = solve([[1, 1], [2, 2]], [1, 2])
    assert x[0] + x[1] == 1
    with pytest.raises(SingularSystem):
        solve([[1, 1], [2, 2]], [1, 3])


def test_scc_and_recurrent_classes():
    succ = [[1], [0], [0, 3], [3]]
    comps = sorted(sorted(c) for c in strongly_connected_components(succ))
    assert comps == [[0, 1], [2], [3]]
    P = [{1: F(1)}, {0: F(1)}, {0: F(1, 2), 3: F(1, 2)}, {3: F(1)}]
    assert sorted(sorted(c) for c in recurrent_classes(P)) == [[0, 1], [3]]


def test_chain_gain_multichain():
    P = [{1: F(1)}, {0: F(1)}, {0: F(1, 2), 3: F(1, 2)}, {3: F(1)}]
    r = [F(1), F(0), F(5), F(-2)]
    g, h = chain_gain_bias(P, r)
    assert tuple(g) == (F(1, 2), F(1, 2), F(-3, 4), F(-2))
    for i in range(4):
        assert g[i] + h[i] == r[i] + sum(p * h[j] for j, p in P[i].items())


# --------------------------------------------------------------------------
# operator


def test_game_validation():
    with pytest.raises(GameError):
        StochGame.build([[[(0, [(0, F(1, 2))])]]])
    with pytest.raises(GameError):
        StochGame.build([[[]]])
    with pytest.raises(GameError):
        StochGame.build([[[(0, [(3, 1)])]]])


def test_apply_examples():
    assert apply_shapley(loop(3), (F(5),)) == (F(8),)
    G = zero_x_game()
    assert apply_shapley(G, (0, 0)) == (1, 0)
    avg = StochGame.build([[[(0, [(0, F(1, 2)), (1, F(1, 2))])]], [[(0, [(1, 1)])]]])
    assert apply_shapley(avg, (0, 2))[0] == 1
    with pytest.raises(GameError):
        apply_shapley(G, (0,))


def test_value_iteration_examples():
    assert [v[0] for v in value_iteration(loop(3), 4)] == [3, 6, 9, 12]
    assert value_iteration(zero_x_game(), 4) == [(1, 0), (1, 1), (2, 1), (2, 2)]
    assert value_iteration(zero_game(), 3) == [(0, 0)] * 3


def test_escape_rate_bounds_examples():
    G = zero_x_game()
    assert escape_rate_bounds(G, (0, 0)) == (0, 1)
    assert escape_rate_bounds(G, (F(1, 2), 0)) == (F(1, 2), F(1, 2))
    assert escape_rate_bounds(loop(3), (F(-7),)) == (3, 3)
    assert escape_rate_bounds(G, (0, 0), steps=40) == (F(1, 2), F(1, 2))


def test_hilbert_seminorm():
    assert hilbert_seminorm((3, 1, 0)) == 3
    assert hilbert_seminorm((2, 2)) == 0
    assert hilbert_seminorm((F(1, 3), 5)) == hilbert_seminorm((F(1, 3) + 7, 12))
    with pytest.raises(GameError):
        hilbert_seminorm(())


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_shapley_order_preserving_and_homogeneous(seed):
    rng = random.Random(seed)
    G = gen.random_game(rng)
    c = gen.random_vector(rng, G.n)
    d = tuple(x + F(rng.randint(0, 6), rng.randint(1, 3)) for x in c)
    lam = F(rng.randint(-9, 9), rng.randint(1, 4))
    Tc, Td = apply_shapley(G, c), apply_shapley(G, d)
    assert all(x <= y for x, y in zip(Tc, Td))
    assert apply_shapley(G, tuple(x + lam for x in c)) == tuple(x + lam for x in Tc)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_float_operator_matches_exact(seed):
    import numpy as np
    rng = random.Random(seed)
    G = gen.random_game(rng)
    c = gen.random_vector(rng, G.n)
    exact = apply_shapley(G, c)
    approx = G.apply_float(np.array([float(x) for x in c]))
    assert np.allclose(approx, [float(x) for x in exact])


# --------------------------------------------------------------------------
# certificates and the sign decision


def test_verify_certificate_examples():
    G = zero_x_game()
    assert verify_certificate(G, GameCertificate("eigenpair", (F(1, 2), F(0)), F(1, 2)))
    assert verify_certificate(zero_game(), GameCertificate("sub", (F(0), F(0))))
    assert not verify_certificate(zero_game(), GameCertificate("strict_super", (F(0), F(0))))
    with pytest.raises(GameError):
        GameCertificate("eigenpair", (F(0),))
    with pytest.raises(GameError):
        GameCertificate("bogus", (F(0),))


def test_decide_sign_examples():
    dec = decide_sign(zero_x_game())
    assert dec.positive and verify_certificate(zero_x_game(), dec.certificate)
    # T(1, 0) = (1, 1) is not a strict super-eigenvector; the average of
    # the iterates (1, 0) and (1, 1) is
    assert dec.certificate.c == (1, F(1, 2))
    assert decide_sign(zero_game()).nonpositive
    assert decide_sign(loop(3)).positive


def test_alternating_cycle_is_never_positive():
    G = StochGame.build([[[(1, [(1, 1)])]], [[(-1, [(0, 1)])]]])
    assert brute_force_mean_payoff(G) == (0, 0)
    assert not decide_sign(G).positive


def test_decide_sign_needs_an_iteration():
    with pytest.raises(GameError):
        decide_sign(loop(1), 0)


def test_unresolved_on_mixed_signs_reports_bounds():
    G = StochGame.build([[[(1, [(0, 1)])]], [[(-1, [(1, 1)])]]])
    dec = decide_sign(G)
    assert not dec.resolved and dec.certificate is None
    assert dec.bounds == (-1, 1)


def test_eigenpair_rho_is_unique():
    G = zero_x_game()
    a = GameCertificate("eigenpair", (F(1, 2), F(0)), F(1, 2))
    b = GameCertificate("eigenpair", (F(7, 2), F(3)), F(1, 2))
    assert verify_certificate(G, a) and verify_certificate(G, b)
    assert not verify_certificate(G, GameCertificate("eigenpair", (F(1, 2), F(0)), F(1)))


# --------------------------------------------------------------------------
# oracle and strategy iteration


def test_oracle_examples():
    assert brute_force_mean_payoff(loop(3)) == (3,)
    assert brute_force_mean_payoff(zero_x_game()) == (F(1, 2), F(1, 2))
    two_loops = StochGame.build([[[(1, [(0, 1)])]], [[(-1, [(1, 1)])]]])
    assert brute_force_mean_payoff(two_loops) == (1, -1)


def test_oracle_cap():
    big = StochGame(tuple((tuple((MinAction(F(0), ((0, F(1)),)),) * 3 for _ in range(3)),) * 8))
    with pytest.raises(OracleCapExceeded):
        brute_force_mean_payoff(big, cap=1000)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_strategy_iteration_matches_oracle(seed):
    G = gen.random_game(random.Random(seed), max_states=3)
    sol = strategy_iteration(G)
    assert sol is not None
    assert sol.gain == brute_force_mean_payoff(G)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_iterate_bounds_contain_every_mean_payoff(seed):
    rng = random.Random(seed)
    G = gen.random_game(rng, max_states=3)
    chi = brute_force_mean_payoff(G)
    k = rng.randint(1, 30)
    v = value_iteration(G, k)[-1]
    lo, hi = min(v) / k, max(v) / k
    assert all(lo <= x <= hi for x in chi)
    assert escape_rate_bounds(G, v)[0] <= min(chi) and max(chi) <= escape_rate_bounds(G, v)[1]


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_decide_sign_certificates_verify(seed):
    G = gen.random_game(random.Random(seed), max_states=3)
    dec = decide_sign(G, 2000)
    if dec.resolved:
        assert verify_certificate(G, dec.certificate)
