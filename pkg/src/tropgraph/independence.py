"""Tropical independence of a finite family of functions, decided through a game.

For functions ``f_1, ..., f_n`` the operator

    T_i(c) = sup_x min_{j != i} ( f_j(x) - f_i(x) + c_j )

is the Shapley operator of a turn-based stochastic game whose states are the
functions and whose MAX actions are the affine segments of the family.  The
family is independent exactly when some ``c`` satisfies ``T(c) > c``; a
vector with ``T(c) <= c`` gives coefficients under which the minimum of the
shifted family is attained twice everywhere.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .exact import INF, to_rational
from .functions import (FunctionError, Segment, TropFunction, common_refinement, evaluate,
                        min_attained_twice)
from .games import (GameCertificate, Vector, MinAction, ShapleyGame, SignDecision, decide_sign,
                    verify_certificate)
from .graph import PointRef


class IndependenceError(ValueError):
    pass


# --------------------------------------------------------------------------
# sup over an interval of a minimum of affine terms


@dataclass(frozen=True)
class SupMinResult:
    value: Fraction
    argmax: Fraction
    achieving_term: tuple  # ("minus", j) | ("plus", j) | ("pair", j, k)


def sup_min_on_interval(terms: Sequence[tuple], u, v) -> SupMinResult:
    """``max`` over ``x in [u, v]`` of ``min_j (gamma_j x + d_j)``, in closed form.

    Nonincreasing terms are worst at ``u``, nondecreasing ones at ``v``, and
    each increasing/decreasing pair contributes the value where the two lines
    cross.  The smallest of all these candidates is the answer.
    """
    if not terms:
        raise IndependenceError("no terms")
    u, v = to_rational(u), to_rational(v)
    if u > v:
        raise IndependenceError("empty interval")
    ts = [(to_rational(g), to_rational(d)) for g, d in terms]
    best = None
    best_term = None
    minus = [j for j, (g, _) in enumerate(ts) if g <= 0]
    plus = [j for j, (g, _) in enumerate(ts) if g >= 0]
    candidates = []
    for j in plus:
        for k in minus:
            gj, dj = ts[j]
            gk, dk = ts[k]
            if gj > gk:
                val = (-gk * dj + gj * dk) / (gj - gk)
                candidates.append((val, ("pair", j, k)))
    for j in minus:
        candidates.append((ts[j][0] * u + ts[j][1], ("minus", j)))
    for j in plus:
        candidates.append((ts[j][0] * v + ts[j][1], ("plus", j)))
    for val, term in candidates:
        if best is None or val < best:
            best, best_term = val, term

    def phi(x):
        return min(g * x + d for g, d in ts)

    # pick a point attaining the value: crossings first, then u, then v
    xs = []
    for j, k in itertools.combinations(range(len(ts)), 2):
        gj, dj = ts[j]
        gk, dk = ts[k]
        if gj != gk:
            x = (dk - dj) / (gj - gk)
            if u < x < v:
                xs.append(x)
    xs.extend([u, v])
    for x in xs:
        if phi(x) == best:
            return SupMinResult(best, x, best_term)
    raise AssertionError("closed form value is not attained; this is a bug")


# --------------------------------------------------------------------------
# lower envelope of lines on an interval


def _envelope_breaks(lines: Sequence[tuple[Fraction, Fraction]], idx: Sequence[int], u, v):
    """Breakpoints (including ``u`` and ``v``) of ``min_{j in idx} lines[j]`` on ``[u, v]``."""
    def val(j, x):
        m, b = lines[j]
        return m * x + b

    if u == v:
        return [u]
    # active line at u: lowest value, ties broken by the smallest slope
    cur = min(idx, key=lambda j: (val(j, u), lines[j][0]))
    x0 = u
    pts = [u]
    while True:
        mc, bc = lines[cur]
        nxt = None
        nxt_x = None
        for j in idx:
            mj, bj = lines[j]
            if mj < mc:
                x = (bj - bc) / (mc - mj)
                if x0 < x < v and (nxt_x is None or x < nxt_x or (x == nxt_x and mj < lines[nxt][0])):
                    nxt, nxt_x = j, x
        if nxt is None:
            break
        pts.append(nxt_x)
        cur, x0 = nxt, nxt_x
    pts.append(v)
    return pts


# --------------------------------------------------------------------------
# the game attached to a family of functions


@dataclass(frozen=True)
class ActionTag:
    """Where a MIN action comes from: ``kind`` is "minus", "plus" or "pair"."""

    kind: str
    j: int
    k: int | None = None

    def abscissa(self, seg: Segment, i: int, c: Sequence) -> Fraction:
        """The point of the segment at which this action's value is realized."""
        if self.kind == "minus":
            return seg.u
        if self.kind == "plus":
            return seg.v
        (mi, ei), (mj, ej), (mk, ek) = seg.data[i], seg.data[self.j], seg.data[self.k]
        gj, gk = mj - mi, mk - mi
        dj, dk = ej - ei + c[self.j], ek - ei + c[self.k]
        x = (dk - dj) / (gj - gk)
        return min(max(x, seg.u), seg.v)


class ReductionGame(ShapleyGame):
    """The game of a family of total functions; actions are generated on demand."""

    def __init__(self, fs: Sequence[TropFunction]):
        if len(fs) < 2:
            raise IndependenceError("need at least two functions")
        g = fs[0].graph
        for f in fs:
            if f.graph is not g and f.graph != g:
                raise IndependenceError("functions live on different graphs")
            if not f.is_total:
                raise IndependenceError(f"function {f.name or '?'} is not total")
        if not g.connected:
            raise IndependenceError("the graph is not connected")
        self.functions = tuple(fs)
        self.graph = g
        self.segments: tuple[Segment, ...] = tuple(common_refinement(fs))
        self._cache: dict[int, tuple] = {}

    @property
    def n(self) -> int:
        return len(self.functions)

    def state_name(self, i: int) -> str:
        return self.functions[i].name or f"f{i + 1}"

    def _build_state(self, i: int):
        acts, tags = [], []
        n = self.n
        for seg in self.segments:
            mi, ei = seg.data[i]
            gam = [seg.data[j][0] - mi for j in range(n)]
            eta = [seg.data[j][1] - ei for j in range(n)]
            others = [j for j in range(n) if j != i]
            minus = [j for j in others if gam[j] <= 0]
            plus = [j for j in others if gam[j] >= 0]
            betas, btags = [], []
            for j in minus:
                betas.append(MinAction(gam[j] * seg.u + eta[j], ((j, Fraction(1)),)))
                btags.append(ActionTag("minus", j))
            for j in plus:
                betas.append(MinAction(gam[j] * seg.v + eta[j], ((j, Fraction(1)),)))
                btags.append(ActionTag("plus", j))
            for j in plus:
                for k in minus:
                    if gam[j] > gam[k]:
                        pj = Fraction(-gam[k], gam[j] - gam[k])
                        pk = Fraction(gam[j], gam[j] - gam[k])
                        betas.append(MinAction(pj * eta[j] + pk * eta[k], ((j, pj), (k, pk))))
                        btags.append(ActionTag("pair", j, k))
            acts.append(tuple(betas))
            tags.append(tuple(btags))
        return tuple(acts), tuple(tags)

    def max_actions(self, i: int):
        if i not in self._cache:
            self._cache[i] = self._build_state(i)
        return self._cache[i][0]

    def provenance(self, i: int) -> tuple[tuple[ActionTag, ...], ...]:
        """``provenance(i)[alpha][beta]`` tells where MIN action ``beta`` comes from."""
        self.max_actions(i)
        return self._cache[i][1]

    def cost_estimate(self) -> int:
        n = self.n
        return len(self.segments) * n * (n + (n * n) // 4)

    # ---- fast evaluation of the same operator

    def segment_values(self, c: Sequence, seg: Segment) -> list[tuple[Fraction, Fraction]]:
        """For every state ``i``: ``(sup over seg of Phi_i, argmax)`` with the preferred tie-break."""
        n = self.n
        lines = [(m, e + c[j]) for j, (m, e) in enumerate(seg.data)]
        full = _envelope_breaks(lines, range(n), seg.u, seg.v)
        # states that are the unique minimizer somewhere need their own envelope
        active = set()
        pts = full if len(full) > 1 else [seg.u]
        probes = list(pts)
        for a, b in zip(pts, pts[1:]):
            probes.append((a + b) / 2)
        for x in probes:
            vals = [m * x + b for m, b in lines]
            lo = min(vals)
            hit = [j for j in range(n) if vals[j] == lo]
            if len(hit) == 1:
                active.add(hit[0])
        # per point: all line values, the minimum, its unique index (or -1), the runner-up
        cache: dict = {}

        def at(x):
            r = cache.get(x)
            if r is None:
                vals = [m * x + b for m, b in lines]
                lo = min(vals)
                hit = [j for j in range(n) if vals[j] == lo]
                if len(hit) == 1:
                    rest = [vals[j] for j in range(n) if j != hit[0]]
                    r = (vals, lo, hit[0], min(rest) if rest else lo)
                else:
                    r = (vals, lo, -1, lo)
                cache[x] = r
            return r

        out = []
        for i in range(n):
            if i in active:
                idx = [j for j in range(n) if j != i]
                bps = _envelope_breaks(lines, idx, seg.u, seg.v)
            else:
                bps = full
            best = None
            arg = None
            # interior breaks first, then u, then v
            order = list(bps[1:-1]) + [bps[0], bps[-1]] if len(bps) > 1 else bps
            for x in order:
                vals, lo, uniq, second = at(x)
                val = (second if uniq == i else lo) - vals[i] + c[i]
                if best is None or val > best:
                    best, arg = val, x
            out.append((best, arg))
        return out

    def apply(self, c: Sequence):
        n = self.n
        res = [None] * n
        for seg in self.segments:
            for i, (val, _) in enumerate(self.segment_values(c, seg)):
                if res[i] is None or val > res[i]:
                    res[i] = val
        return tuple(res)

    @cached_property
    def _float_data(self):
        A = len(self.segments)
        n = self.n
        m = np.zeros((A, n))
        e = np.zeros((A, n))
        u = np.zeros(A)
        v = np.zeros(A)
        for a, seg in enumerate(self.segments):
            u[a], v[a] = float(seg.u), float(seg.v)
            for j, (mj, ej) in enumerate(seg.data):
                m[a, j], e[a, j] = mj, float(ej)
        return m, e, u, v

    def _float_phi(self, c: np.ndarray):
        """``Phi_i`` at every candidate point of every segment, shape ``(A, P, n)``.

        Candidates are ``u``, ``v`` and the clamped crossings of every pair of
        lines; ``Phi_i`` is concave on a segment, so its maximum is among them.
        """
        m, e, u, v = self._float_data
        n = self.n
        b = e + c[None, :]
        dm = m[:, :, None] - m[:, None, :]
        db = b[:, None, :] - b[:, :, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(dm != 0, db / np.where(dm != 0, dm, 1), u[:, None, None])
        x = np.clip(x, u[:, None, None], v[:, None, None]).reshape(len(u), n * n)
        X = np.concatenate([u[:, None], v[:, None], x], axis=1)          # (A, P)
        L = m[:, None, :] * X[:, :, None] + b[:, None, :]                 # (A, P, n)
        order = np.argsort(L, axis=2)
        first = np.take_along_axis(L, order[:, :, :1], axis=2)[..., 0]
        second = np.take_along_axis(L, order[:, :, 1:2], axis=2)[..., 0]
        arg = order[:, :, 0]
        own = m[:, None, :] * X[:, :, None] + e[:, None, :]                # f_i at X
        others = np.where(arg[:, :, None] == np.arange(n)[None, None, :],
                          second[:, :, None], first[:, :, None])
        return others - own

    def apply_float(self, c: np.ndarray) -> np.ndarray:
        return self._float_phi(c).max(axis=(0, 1))

    def _candidate_point(self, seg: Segment, p: int, c: Sequence) -> Fraction:
        if p == 0:
            return seg.u
        if p == 1:
            return seg.v
        j, k = divmod(p - 2, self.n)
        (mj, ej), (mk, ek) = seg.data[j], seg.data[k]
        if mj == mk:
            return seg.u
        x = (ek + c[k] - ej - c[j]) / (mj - mk)
        return min(max(x, seg.u), seg.v)

    def phi(self, i: int, seg: Segment, x, c: Sequence) -> Fraction:
        """``min_{j != i} (f_j + c_j)(x) - f_i(x)`` on the segment, exactly."""
        mi, ei = seg.data[i]
        return min(seg.data[j][0] * x + seg.data[j][1] + c[j]
                   for j in range(self.n) if j != i) - (mi * x + ei)

    def certify_positive(self, c: Sequence) -> bool:
        """Cheap sufficient test for ``T(c) > c``.

        A floating-point pass suggests, for every state, a point where
        ``Phi_i`` is largest; the inequality ``Phi_i(x) > c_i`` is then
        checked exactly at that point.  Since ``T_i(c) >= Phi_i(x)`` this
        proves the strict inequality without evaluating ``T`` everywhere.
        """
        phi = self._float_phi(np.array([float(t) for t in c]))
        A, P, n = phi.shape
        flat = phi.reshape(A * P, n).argmax(axis=0)
        for i in range(n):
            a, p = divmod(int(flat[i]), P)
            seg = self.segments[a]
            x = self._candidate_point(seg, p, c)
            if not self.phi(i, seg, x, c) > c[i]:
                return False
        return True


def build_game(fs: Sequence[TropFunction], check_samples: int = 8, seed: int = 0) -> ReductionGame:
    """The game of ``fs``, with a construction-time self-check.

    For a few random vectors ``c`` the value of every ``(state, segment)``
    computed from the constructed MIN actions is compared with the closed
    form of :func:`sup_min_on_interval`.
    """
    G = ReductionGame(fs)
    if check_samples and G.cost_estimate() <= 20_000:
        rng = np.random.default_rng(seed)
        for _ in range(check_samples):
            c = [Fraction(int(t), 4) for t in rng.integers(-20, 21, size=G.n)]
            mismatch = game_segment_mismatch(G, c)
            if mismatch is not None:
                raise AssertionError(f"game construction check failed at {mismatch}")
    return G


def segment_sup(G: ReductionGame, i: int, alpha: int, c: Sequence) -> SupMinResult:
    seg = G.segments[alpha]
    mi, ei = seg.data[i]
    terms = [(seg.data[j][0] - mi, seg.data[j][1] - ei + c[j]) for j in range(G.n) if j != i]
    return sup_min_on_interval(terms, seg.u, seg.v)


def game_segment_mismatch(G: ReductionGame, c: Sequence):
    """First ``(i, alpha)`` where the MIN actions disagree with the closed form, else ``None``."""
    for i in range(G.n):
        for alpha, betas in enumerate(G.max_actions(i)):
            via_actions = min(a.value(c) for a in betas)
            if via_actions != segment_sup(G, i, alpha, c).value:
                return (i, alpha)
    return None


# --------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Independent:
    certificate: GameCertificate
    points: tuple[PointRef, ...]
    minimizers: tuple[int, ...]
    permutation: tuple[int, ...] | None
    rho_bounds: tuple[Fraction, Fraction]
    method: str = ""
    kind: str = field(default="independent", init=False)


@dataclass(frozen=True)
class Dependent:
    coefficients: tuple[Fraction, ...]
    certificate: GameCertificate
    rho_bounds: tuple[Fraction, Fraction]
    method: str = ""
    kind: str = field(default="dependent", init=False)


@dataclass(frozen=True)
class Unresolved:
    bounds: tuple[Fraction, Fraction]
    kind: str = field(default="unresolved", init=False)


IndependenceVerdict = Independent | Dependent | Unresolved


def check_independence(fs: Sequence[TropFunction], max_iters: int = 10_000,
                       game: ReductionGame | None = None) -> IndependenceVerdict:
    G = game if game is not None else build_game(fs)
    dec: SignDecision = decide_sign(G, max_iters)
    if dec.positive:
        c = dec.certificate.c
        Tc, points = _witness_scan(G, c)
        d = [a - b for a, b in zip(Tc, c)]
        perm = None
        if len(fs) <= 9:
            ok, perms = unique_permutation_check(fs, points)
            if not ok:
                raise AssertionError("witness points do not give a unique optimal permutation")
            perm = perms[0]
        return Independent(dec.certificate, tuple(points), tuple(range(len(fs))), perm,
                           (min(d), max(d)), dec.method)
    if dec.nonpositive:
        c = dec.certificate.c
        verdict = min_attained_twice(fs, c)
        if not verdict.ok:
            raise AssertionError(f"sub-certificate fails the min-twice check at {verdict.witness}")
        # T has no strict sub-eigenvector (at a point, the index attaining the
        # minimum of f_j + c_j already gives T_i(c) >= c_i), so every mean
        # payoff is >= 0 and a sub-certificate pins rho to 0
        return Dependent(tuple(c), dec.certificate, (Fraction(0), Fraction(0)), dec.method)
    return Unresolved(dec.bounds)


def _witness_scan(G: ReductionGame, c: Vector):
    """Exact ``T(c)`` together with the witness points; raises unless ``T(c) > c``."""
    n = G.n
    best = [None] * n
    for seg in G.segments:
        for i, (val, x) in enumerate(G.segment_values(c, seg)):
            if best[i] is None or val > best[i][0]:
                best[i] = (val, seg, x)
    Tc = tuple(b[0] for b in best)
    if not all(t > ci for t, ci in zip(Tc, c)):
        raise IndependenceError("c is not a strict super-eigenvector")
    points = []
    for i in range(n):
        _, seg, x = best[i]
        p = seg.point(G.graph, x)
        vals = [evaluate(f, p) + cj for f, cj in zip(G.functions, c)]
        lo = min(vals)
        if vals[i] != lo or sum(1 for t in vals if t == lo) != 1:
            raise AssertionError(f"extracted point for f{i + 1} has no unique minimizer")
        points.append(p)
    return Tc, points


def extract_witness_points(fs: Sequence[TropFunction], c: Sequence,
                           game: ReductionGame | None = None) -> list[PointRef]:
    """Points ``x_i`` at which ``f_i + c_i`` is the unique minimum of the shifted family."""
    G = game if game is not None else ReductionGame(fs)
    c = tuple(to_rational(x) for x in c)
    return _witness_scan(G, c)[1]


def unique_permutation_check(fs: Sequence[TropFunction], points: Sequence[PointRef],
                             keep: int = 10):
    """Is ``min_sigma sum_k f_{sigma(k)}(x_k)`` attained by exactly one permutation?

    Returns ``(unique, minimizers)`` with at most ``keep`` minimizing permutations,
    each given as the tuple ``(sigma(1), ..., sigma(n))`` (0-based).
    """
    n = len(fs)
    if n != len(points):
        raise IndependenceError("one point per function is required")
    if n > 9:
        raise IndependenceError("permutation enumeration is limited to n <= 9")
    V = [[evaluate(f, p) for f in fs] for p in points]
    best = None
    mins: list[tuple[int, ...]] = []
    count = 0
    for sigma in itertools.permutations(range(n)):
        s = sum(V[k][sigma[k]] for k in range(n))
        if best is None or s < best:
            best, mins, count = s, [sigma], 1
        elif s == best:
            count += 1
            if len(mins) < keep:
                mins.append(sigma)
    if best == INF:
        return False, mins
    return count == 1, mins
