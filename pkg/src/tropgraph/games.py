"""Turn-based stochastic mean-payoff games and their Shapley operators.

In state ``i`` player MAX picks an action ``alpha``; then MIN picks an action
``beta`` among those attached to ``(i, alpha)``; the payoff ``r`` is collected
and the next state is drawn from a rational distribution.  The dynamic
programming operator is

    T_i(c) = max_alpha min_beta ( r + sum_j P_j c_j ).

``decide_sign`` looks for a vector ``c`` with ``T(c) > c`` (every mean payoff
is positive) or ``T(c) <= c`` (every mean payoff is nonpositive) and only
ever reports a sign together with a vector that has been checked in exact
arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .exact import to_rational
from .linalg import chain_gain_bias, solve

Vector = tuple[Fraction, ...]


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class MinAction:
    payoff: Fraction
    transitions: tuple[tuple[int, Fraction], ...]

    def value(self, c: Sequence) -> Fraction:
        return self.payoff + sum(p * c[j] for j, p in self.transitions)


class ShapleyGame:
    """Interface shared by explicit games and lazily generated ones.

    Subclasses provide ``n``, ``max_actions(i)`` and may override ``apply``
    and ``apply_float`` with faster routines computing the same operator.
    """

    n: int

    def max_actions(self, i: int) -> Sequence[Sequence[MinAction]]:
        raise NotImplementedError

    def size(self) -> int:
        """Total number of MIN actions; a cost measure."""
        return sum(len(b) for i in range(self.n) for b in self.max_actions(i))

    def apply(self, c: Sequence) -> Vector:
        return tuple(max(min(a.value(c) for a in bs) for bs in self.max_actions(i))
                     for i in range(self.n))

    def apply_float(self, c: np.ndarray) -> np.ndarray:
        return self._float_tables.apply(c)

    @cached_property
    def _float_tables(self) -> "_FloatTables":
        return _FloatTables.from_game(self)

    def state_name(self, i: int) -> str:
        return str(i)


@dataclass(frozen=True)
class StochGame(ShapleyGame):
    actions: tuple[tuple[tuple[MinAction, ...], ...], ...]
    states: tuple[str, ...] = ()
    action_names: tuple[tuple[str, ...], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.actions:
            raise GameError("a game needs at least one state")
        n = len(self.actions)
        if self.states and len(self.states) != n:
            raise GameError("one name per state is required")
        for i, alphas in enumerate(self.actions):
            if not alphas:
                raise GameError(f"state {i}: no MAX action")
            for alpha, betas in enumerate(alphas):
                if not betas:
                    raise GameError(f"state {i}, MAX action {alpha}: no MIN action")
                for b in betas:
                    total = Fraction(0)
                    for j, p in b.transitions:
                        if not 0 <= j < n:
                            raise GameError(f"state {i}: transition to unknown state {j}")
                        if p < 0:
                            raise GameError(f"state {i}: negative probability {p}")
                        total += p
                    if total != 1:
                        raise GameError(f"state {i}: probabilities sum to {total}, not 1")

    @property
    def n(self) -> int:  # type: ignore[override]
        return len(self.actions)

    def max_actions(self, i: int):
        return self.actions[i]

    def state_name(self, i: int) -> str:
        return self.states[i] if self.states else str(i)

    @classmethod
    def build(cls, table, states=None) -> "StochGame":
        """Build from nested lists: ``table[i][alpha][beta] = (payoff, [(j, p), ...])``."""
        acts = []
        for alphas in table:
            row = []
            for betas in alphas:
                row.append(tuple(
                    MinAction(to_rational(r), tuple((int(j), to_rational(p)) for j, p in tr))
                    for r, tr in betas))
            acts.append(tuple(row))
        return cls(tuple(acts), tuple(states) if states else ())


class _FloatTables:
    """Flattened arrays for evaluating the operator in double precision."""

    def __init__(self, payoff, act_of_entry, state_of_entry, prob, beta_starts, alpha_starts, n):
        self.payoff = payoff
        self.act_of_entry = act_of_entry
        self.state_of_entry = state_of_entry
        self.prob = prob
        self.beta_starts = beta_starts
        self.alpha_starts = alpha_starts
        self.n = n

    @classmethod
    def from_game(cls, G: ShapleyGame) -> "_FloatTables":
        payoff, act, st, pr, beta_starts, alpha_starts = [], [], [], [], [], []
        k = 0
        n_alpha = 0
        for i in range(G.n):
            alpha_starts.append(n_alpha)
            for betas in G.max_actions(i):
                beta_starts.append(k)
                n_alpha += 1
                for b in betas:
                    payoff.append(float(b.payoff))
                    for j, p in b.transitions:
                        act.append(k)
                        st.append(j)
                        pr.append(float(p))
                    k += 1
        return cls(np.array(payoff), np.array(act, dtype=np.int64), np.array(st, dtype=np.int64),
                   np.array(pr), np.array(beta_starts, dtype=np.int64),
                   np.array(alpha_starts, dtype=np.int64), G.n)

    def apply(self, c: np.ndarray) -> np.ndarray:
        vals = self.payoff + np.bincount(self.act_of_entry, weights=self.prob * c[self.state_of_entry],
                                         minlength=len(self.payoff))
        per_alpha = np.minimum.reduceat(vals, self.beta_starts)
        return np.maximum.reduceat(per_alpha, self.alpha_starts)


# --------------------------------------------------------------------------
# basic operations


def _vec(c) -> Vector:
    return tuple(to_rational(x) for x in c)


def apply_shapley(G: ShapleyGame, c: Sequence) -> Vector:
    if len(c) != G.n:
        raise GameError(f"vector of length {len(c)} for a game with {G.n} states")
    return G.apply(_vec(c))


def value_iteration(G: ShapleyGame, N: int) -> list[Vector]:
    """``v^1, ..., v^N`` with ``v^k = T^k(0)``."""
    if N < 1:
        raise GameError("N must be at least 1")
    v: Vector = (Fraction(0),) * G.n
    out = []
    for _ in range(N):
        v = G.apply(v)
        out.append(v)
    return out


def escape_rate_bounds(G: ShapleyGame, c: Sequence, steps: int = 1) -> tuple[Fraction, Fraction]:
    """``min`` and ``max`` of ``(T^k(c) - c) / k``; they bracket every per-state mean payoff."""
    if steps < 1:
        raise GameError("steps must be at least 1")
    c = _vec(c)
    d = c
    for _ in range(steps):
        d = G.apply(d)
    diff = [(x - y) / steps for x, y in zip(d, c)]
    return min(diff), max(diff)


def hilbert_seminorm(x: Sequence) -> Fraction:
    if len(x) == 0:
        raise GameError("Hilbert seminorm of an empty vector")
    return max(x) - min(x)


# --------------------------------------------------------------------------
# certificates


CERT_KINDS = ("eigenpair", "strict_super", "sub")


@dataclass(frozen=True)
class GameCertificate:
    kind: str
    c: Vector
    rho: Fraction | None = None

    def __post_init__(self):
        if self.kind not in CERT_KINDS:
            raise GameError(f"unknown certificate kind {self.kind!r}")
        if (self.kind == "eigenpair") != (self.rho is not None):
            raise GameError("rho is given exactly for eigenpair certificates")


def verify_certificate(G: ShapleyGame, cert: GameCertificate) -> bool:
    if len(cert.c) != G.n:
        raise GameError("certificate length does not match the game")
    Tc = G.apply(cert.c)
    d = [x - y for x, y in zip(Tc, cert.c)]
    if cert.kind == "eigenpair":
        return all(x == cert.rho for x in d)
    if cert.kind == "strict_super":
        return all(x > 0 for x in d)
    return all(x <= 0 for x in d)


@dataclass(frozen=True)
class SignDecision:
    """Outcome of :func:`decide_sign`: ``"positive"``, ``"nonpositive"`` or ``"unresolved"``."""

    outcome: str
    certificate: GameCertificate | None
    bounds: tuple[Fraction, Fraction]
    method: str = ""
    iterations: int = 0

    @property
    def positive(self) -> bool:
        return self.outcome == "positive"

    @property
    def nonpositive(self) -> bool:
        return self.outcome == "nonpositive"

    @property
    def resolved(self) -> bool:
        return self.outcome != "unresolved"


def _classify(G: ShapleyGame, c: Vector, Tc: Vector | None = None):
    quick = getattr(G, "certify_positive", None)
    if Tc is None and quick is not None and quick(c):
        return GameCertificate("strict_super", c), None
    if Tc is None:
        Tc = G.apply(c)
    d = [x - y for x, y in zip(Tc, c)]
    if all(x > 0 for x in d):
        return GameCertificate("strict_super", c), d
    if all(x <= 0 for x in d):
        return GameCertificate("sub", c), d
    return None, d


def _bits(c: Vector) -> int:
    return max((x.denominator.bit_length() + abs(x.numerator).bit_length() for x in c), default=0)


def decide_sign(G: ShapleyGame, max_iters: int = 10_000, *, exact_work: int = 250_000,
                bit_budget: int = 4096, use_strategy_iteration: bool = True,
                strategy_cap: int = 60_000, float_search: bool = True) -> SignDecision:
    """Find the common sign of the mean payoffs, with an exactly checked certificate.

    The search runs in phases and stops at the first certificate:

    1. a short exact Kleene iteration ``c <- T(c)`` from 0, also trying
       averages of recent iterates (they damp the oscillation of periodic
       games);
    2. exact strategy iteration, giving optimal strategies and a pair
       ``(g, h)`` such that ``h + t g`` is an invariant half-line; the
       vectors ``h + t g`` for growing ``t`` are checked;
    3. the Kleene iteration resumed, up to the exact-work budget;
    4. value iteration in floating point; promising candidates are converted
       to rationals and checked exactly.

    ``Unresolved`` carries rigorous bounds on the mean payoffs: ``min/max
    of T^k(0)/k`` from the last exact iterate, sharpened by the exact gains
    of strategy iteration when those are available.
    """
    if max_iters < 1:
        raise GameError("max_iters must be at least 1")
    n = G.n
    zero: Vector = (Fraction(0),) * n
    size = max(1, _cost_estimate(G))
    exact_steps = min(max_iters, exact_work // size)
    state = _KleeneState(zero)
    warmup = min(exact_steps, 64)
    found = _kleene(G, state, warmup, bit_budget)
    if found is not None:
        return found
    last_bounds = state.bounds
    if use_strategy_iteration and size <= strategy_cap:
        sol = strategy_iteration(G, max_rounds=max(50, min(max_iters, 500)))
        if sol is not None:
            g, h = sol.gain, sol.bias
            if all(x > 0 for x in g) or all(x <= 0 for x in g):
                for t in _HALF_LINE_STEPS:
                    c = tuple(hi + t * gi for hi, gi in zip(h, g))
                    cert, _ = _classify(G, c)
                    if cert is not None:
                        return SignDecision(_outcome(cert), cert, (min(g), max(g)),
                                            "strategy-iteration", state.k)
            else:
                # The gains are the exact mean payoffs and their signs differ, so
                # neither certificate kind exists; report the sharp bounds.
                return SignDecision("unresolved", None, (min(g), max(g)), "strategy-iteration",
                                    state.k)
    found = _kleene(G, state, exact_steps, bit_budget)
    if found is not None:
        return found
    last_bounds = _meet(last_bounds, state.bounds)
    k_done = state.k
    if float_search:
        cert = _float_search(G, max_iters)
        if cert is not None:
            return SignDecision(_outcome(cert), cert, _bounds_from(G.apply(cert.c), cert.c, 1),
                                "float-search", max_iters)
    if k_done == 0:
        Tv = G.apply(zero)
        last_bounds = _meet(last_bounds, (min(Tv), max(Tv)))
    return SignDecision("unresolved", None, last_bounds, "exhausted", k_done)


class _KleeneState:
    """Iterates of the exact Kleene phase, kept so the phase can be resumed."""

    def __init__(self, v: Vector):
        self.v = v
        self.k = 0
        self.recent: list[Vector] = []
        self.bounds: tuple | None = None
        self.stopped = False


def _meet(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return (max(a[0], b[0]), min(a[1], b[1]))


def _kleene(G: ShapleyGame, st: _KleeneState, until: int, bit_budget: int) -> SignDecision | None:
    """Exact iteration ``v <- T(v)`` up to step ``until``, trying recent averages at checkpoints."""
    while st.k < until and not st.stopped:
        v = st.v
        Tv = G.apply(v)
        cert, _ = _classify(G, v, Tv)
        if cert is not None:
            return SignDecision(_outcome(cert), cert, _bounds_from(Tv, v, 1), "kleene", st.k + 1)
        st.k += 1
        k = st.k
        st.v = Tv
        st.bounds = (min(Tv) / k, max(Tv) / k)
        st.recent.append(Tv)
        if len(st.recent) > 12:
            st.recent.pop(0)
        if k >= 2 and (k & (k - 1) == 0 or k % 16 == 0):
            for p in range(2, len(st.recent) + 1):
                avg = tuple(sum(col) / p for col in zip(*st.recent[-p:]))
                cert, _ = _classify(G, avg)
                if cert is not None:
                    return SignDecision(_outcome(cert), cert, st.bounds, "kleene-average", k)
        if _bits(Tv) > bit_budget:
            st.stopped = True
    return None


_HALF_LINE_STEPS = (0, 1, 16, 256, 2**16, 2**32, 2**64)


def _outcome(cert: GameCertificate) -> str:
    return "positive" if cert.kind == "strict_super" else "nonpositive"


def _bounds_from(Tc, c, steps):
    d = [(x - y) / steps for x, y in zip(Tc, c)]
    return min(d), max(d)


def _cost_estimate(G: ShapleyGame) -> int:
    est = getattr(G, "cost_estimate", None)
    return est() if callable(est) else G.size()


def _float_search(G: ShapleyGame, max_iters: int) -> GameCertificate | None:
    n = G.n
    v = np.zeros(n)
    window: list[np.ndarray] = []
    checkpoints = set()
    k = 1
    while k <= max_iters:
        checkpoints.add(k)
        k *= 2
    checkpoints.add(max_iters)
    tried = 0
    with np.errstate(all="ignore"):
        for k in range(1, max_iters + 1):
            v = G.apply_float(v)
            window.append(v)
            if len(window) > 64:
                window.pop(0)
            if k not in checkpoints:
                continue
            # shift so the numbers stay small; T commutes with constants
            base = v.min()
            cands = [v - base]
            for p in (2, 3, 4, 5, 6, 8, 12, 16, 24, 32, 48, 64):
                if p <= len(window):
                    cands.append(np.mean(window[-p:], axis=0) - base)
            for cand in cands:
                d = G.apply_float(cand) - cand
                scale = 1e-9 * max(1.0, float(np.abs(cand).max()))
                if d.min() > scale or d.max() <= scale:
                    for c in _rationalize(cand):
                        # cheap float screen before any exact work
                        cf = np.array([float(t) for t in c])
                        dc = G.apply_float(cf) - cf
                        tol = 1e-9 * max(1.0, float(np.abs(cf).max()))
                        if not (dc.min() > tol or dc.max() <= tol):
                            continue
                        tried += 1
                        cert, _ = _classify(G, c)
                        if cert is not None:
                            return cert
                if tried > 200:
                    return None
    return None


def _rationalize(x: np.ndarray):
    """Rational vectors near ``x``: small denominators first, then the exact binary value."""
    seen = set()
    for den in (1, 2, 4, 12, 60, 840, 10**6):
        c = tuple(Fraction(float(t)).limit_denominator(den) for t in x)
        if c not in seen:
            seen.add(c)
            yield c
    c = tuple(Fraction(float(t)) for t in x)
    if c not in seen:
        yield c


# --------------------------------------------------------------------------
# exact strategy iteration


@dataclass(frozen=True)
class StrategySolution:
    sigma: tuple[int, ...]
    tau: tuple[int, ...]
    gain: Vector
    bias: Vector


def _chain(G: ShapleyGame, sigma, tau):
    P, r = [], []
    for i in range(G.n):
        a = G.max_actions(i)[sigma[i]][tau[i]]
        row: dict[int, Fraction] = {}
        for j, p in a.transitions:
            row[j] = row.get(j, 0) + p
        P.append(row)
        r.append(a.payoff)
    return P, r


def _lex_key(a: MinAction, g, h):
    return (sum(p * g[j] for j, p in a.transitions), a.payoff + sum(p * h[j] for j, p in a.transitions))


def _min_response(G: ShapleyGame, sigma, tau=None, max_rounds: int = 500):
    """Multichain policy iteration for MIN against the fixed MAX strategy ``sigma``."""
    n = G.n
    tau = list(tau) if tau is not None else [0] * n
    for _ in range(max_rounds):
        P, r = _chain(G, sigma, tau)
        g, h = chain_gain_bias(P, r)
        changed = False
        for i in range(n):
            betas = G.max_actions(i)[sigma[i]]
            best = (g[i], g[i] + h[i])
            choice = tau[i]
            for b, a in enumerate(betas):
                key = _lex_key(a, g, h)
                if key < best:
                    best, choice = key, b
            if choice != tau[i]:
                tau[i] = choice
                changed = True
        if not changed:
            return tuple(tau), g, h
    return None


def strategy_iteration(G: ShapleyGame, max_rounds: int = 200) -> StrategySolution | None:
    """Exact strategy improvement for MAX with MIN best responses.

    Returns ``None`` when the round budget runs out or a strategy repeats.
    """
    n = G.n
    sigma = [0] * n
    seen = set()
    tau = None
    for _ in range(max_rounds):
        resp = _min_response(G, sigma, tau)
        if resp is None:
            return None
        tau, g, h = resp
        seen.add(tuple(sigma))
        new = list(sigma)
        for i in range(n):
            alphas = G.max_actions(i)
            best = (g[i], g[i] + h[i])
            for al, betas in enumerate(alphas):
                if al == sigma[i]:
                    continue
                first = min(sum(p * g[j] for j, p in a.transitions) for a in betas)
                second = min(a.payoff + sum(p * h[j] for j, p in a.transitions) for a in betas
                             if sum(p * g[j] for j, p in a.transitions) == first)
                if (first, second) > best:
                    best = (first, second)
                    new[i] = al
        if new == sigma:
            return StrategySolution(tuple(sigma), tuple(tau), tuple(g), tuple(h))
        if tuple(new) in seen:
            return None
        # keep MIN's reply where it is still valid for the new MAX action
        tau = [t if new[i] == sigma[i] else 0 for i, t in enumerate(tau)]
        sigma = new
    return None


# --------------------------------------------------------------------------
# brute-force oracle


class OracleCapExceeded(GameError):
    pass


def _strategy_count(G: ShapleyGame) -> int:
    total = 0
    for sigma in itertools.product(*[range(len(G.max_actions(i))) for i in range(G.n)]):
        total += math.prod(len(G.max_actions(i)[sigma[i]]) for i in range(G.n))
    return total


def _oracle_gain(P, r) -> list[Fraction]:
    """Gain of a Markov reward chain from the system g = P g, g + h = r + P h, h + w = P w.

    This system determines ``g`` uniquely; it is solved as one block
    without looking at the class structure.
    """
    n = len(P)
    rows, rhs = [], []
    for i in range(n):
        row = [Fraction(0)] * (3 * n)
        row[i] += 1
        for j, p in P[i].items():
            row[j] -= p
        rows.append(row)
        rhs.append(Fraction(0))
    for i in range(n):
        row = [Fraction(0)] * (3 * n)
        row[i] += 1
        row[n + i] += 1
        for j, p in P[i].items():
            row[n + j] -= p
        rows.append(row)
        rhs.append(r[i])
    for i in range(n):
        row = [Fraction(0)] * (3 * n)
        row[n + i] += 1
        row[2 * n + i] += 1
        for j, p in P[i].items():
            row[2 * n + j] -= p
        rows.append(row)
        rhs.append(Fraction(0))
    x = solve(rows, rhs)
    return x[:n]


def brute_force_mean_payoff(G: ShapleyGame, cap: int = 10**6) -> Vector:
    """Per-state value ``max_sigma min_tau`` of the mean payoff, by enumeration."""
    count = _strategy_count(G)
    if count > cap:
        raise OracleCapExceeded(f"{count} strategy pairs exceed the cap {cap}")
    n = G.n
    best = [None] * n
    for sigma in itertools.product(*[range(len(G.max_actions(i))) for i in range(n)]):
        worst = [None] * n
        for tau in itertools.product(*[range(len(G.max_actions(i)[sigma[i]])) for i in range(n)]):
            P, r = [], []
            for i in range(n):
                a = G.max_actions(i)[sigma[i]][tau[i]]
                row: dict[int, Fraction] = {}
                for j, p in a.transitions:
                    row[j] = row.get(j, 0) + p
                P.append(row)
                r.append(a.payoff)
            g = _oracle_gain(P, r)
            worst = [x if w is None or x < w else w for x, w in zip(g, worst)]
        best = [x if b is None or x > b else b for x, b in zip(worst, best)]
    return tuple(best)
