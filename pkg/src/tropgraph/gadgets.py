"""Hardness gadgets and a feasibility decider for max/avg/difference constraints.

The constraint systems handled here have variables ``c_1, ..., c_n`` and
three kinds of constraints:

* average: ``c_i >= (c_j + c_k) / 2`` for ``(i, j, k)`` in ``avg``;
* minimum: ``c_i >= min(c_j, c_k)`` for ``(i, j, k)`` in ``mins``;
* difference: ``c_i >= a_ij + c_j`` for every ordered pair ``i != j``.

Indices are 1-based throughout, matching the text formats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exact import INF, is_inf, to_rational
from .functions import EdgeProfile, TropFunction, evaluate, min_attained_twice
from .games import GameCertificate, MinAction, StochGame, decide_sign, strategy_iteration, verify_certificate
from .graph import Edge, Interior, MetricGraph, Vertex
from .semimodule import EvalMatrix, Semimodule, evaluation_matrix

Triple = tuple[int, int, int]
Pair = tuple[int, int]


class GadgetError(ValueError):
    pass


# --------------------------------------------------------------------------
# constraint systems


@dataclass(frozen=True)
class CSPInstance:
    n: int
    avg: tuple[Triple, ...]
    mins: tuple[Triple, ...]
    a: tuple[tuple[Pair, int], ...]

    @classmethod
    def make(cls, n: int, avg=(), mins=(), a: Mapping[Pair, int] | None = None,
             default_a: int | None = None) -> "CSPInstance":
        """Build an instance; pairs missing from ``a`` take ``default_a`` when given."""
        a = dict(a or {})
        if default_a is not None:
            for i, j in itertools.permutations(range(1, n + 1), 2):
                a.setdefault((i, j), default_a)
        pairs = tuple(sorted(((int(i), int(j)), v) for (i, j), v in a.items()))
        return cls(n, tuple(tuple(t) for t in avg), tuple(tuple(t) for t in mins), pairs)

    @property
    def a_map(self) -> dict[Pair, int]:
        return dict(self.a)

    @property
    def pairs(self) -> list[Pair]:
        return list(itertools.permutations(range(1, self.n + 1), 2))

    @property
    def M(self) -> int:
        return -min(v for _, v in self.a) + 1


@dataclass(frozen=True)
class CSPReport:
    errors: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate_csp(csp: CSPInstance) -> CSPReport:
    errs = []
    if csp.n < 2:
        errs.append("need at least two variables")
    a = csp.a_map
    for i, j in csp.pairs:
        if (i, j) not in a:
            errs.append(f"missing a[{i},{j}]")
    for (i, j), v in csp.a:
        if not (1 <= i <= csp.n and 1 <= j <= csp.n) or i == j:
            errs.append(f"a[{i},{j}] is not indexed by a pair of distinct variables")
        if isinstance(v, bool) or not isinstance(v, int):
            errs.append(f"a[{i},{j}] = {v!r} is not an integer")
    for i, j in csp.pairs:
        if i < j and (i, j) in a and (j, i) in a and a[i, j] + a[j, i] > 0:
            errs.append(f"a[{i},{j}] + a[{j},{i}] = {a[i, j] + a[j, i]} > 0: trivially unsatisfiable")
    for name, triples in (("avg", csp.avg), ("min", csp.mins)):
        seen = set()
        for t in triples:
            if len(t) != 3:
                errs.append(f"{name} constraint {t} is not a triple")
                continue
            i, j, k = t
            if len({i, j, k}) != 3:
                errs.append(f"{name} constraint {t} has repeated indices")
            if not j < k:
                errs.append(f"{name} constraint {t} needs j < k")
            if not all(1 <= x <= csp.n for x in t):
                errs.append(f"{name} constraint {t} uses an unknown variable")
            if t in seen:
                errs.append(f"{name} constraint {t} is repeated")
            seen.add(t)
    return CSPReport(tuple(errs))


def _require_valid(csp: CSPInstance):
    rep = validate_csp(csp)
    if not rep.ok:
        raise GadgetError("; ".join(rep.errors))


def feasible_witness_check(csp: CSPInstance, c: Sequence) -> bool:
    """Does ``c`` (indexed from 1 through ``c[0]``) satisfy every constraint?"""
    if len(c) != csp.n:
        raise GadgetError("one value per variable is required")
    c = [to_rational(x) for x in c]
    v = lambda i: c[i - 1]  # noqa: E731
    for i, j, k in csp.avg:
        if 2 * v(i) < v(j) + v(k):
            return False
    for i, j, k in csp.mins:
        if v(i) < min(v(j), v(k)):
            return False
    for (i, j), aij in csp.a:
        if v(i) < aij + v(j):
            return False
    return True


def constraint_game(csp: CSPInstance) -> StochGame:
    """The game whose operator is ``G(c)_i = max`` over constraints headed by ``i``.

    An average constraint is a single MIN move to ``j`` or ``k`` with
    probability 1/2 each; a minimum constraint lets MIN pick ``j`` or ``k``;
    a difference constraint pays ``a_ij`` and moves to ``j``.
    """
    half = Fraction(1, 2)
    acts = [[] for _ in range(csp.n)]
    names = [[] for _ in range(csp.n)]
    for i, j, k in csp.avg:
        acts[i - 1].append((MinAction(Fraction(0), ((j - 1, half), (k - 1, half))),))
        names[i - 1].append(f"avg{(i, j, k)}")
    for i, j, k in csp.mins:
        acts[i - 1].append((MinAction(Fraction(0), ((j - 1, Fraction(1)),)),
                            MinAction(Fraction(0), ((k - 1, Fraction(1)),))))
        names[i - 1].append(f"min{(i, j, k)}")
    for (i, j), aij in csp.a:
        acts[i - 1].append((MinAction(Fraction(aij), ((j - 1, Fraction(1)),)),))
        names[i - 1].append(f"a{(i, j)}")
    return StochGame(tuple(tuple(x) for x in acts), tuple(f"c{i}" for i in range(1, csp.n + 1)),
                     tuple(tuple(x) for x in names))


@dataclass(frozen=True)
class DominionCertificate:
    """Evidence of infeasibility.

    ``states`` is a set ``S`` of variables (0-based), ``strategy`` picks for
    each of them one constraint (MAX action) whose every MIN move stays in
    ``S``, and ``c`` satisfies ``min over MIN moves of (payoff + P c) > c``
    on ``S``.  A feasible point would be a vector with the reverse
    inequality for the same one-player operator, which cannot coexist with
    ``c``.
    """

    states: tuple[int, ...]
    strategy: tuple[int, ...]
    c: tuple[Fraction, ...]


def restricted_game(G: StochGame, cert: DominionCertificate) -> StochGame:
    pos = {s: k for k, s in enumerate(cert.states)}
    acts = []
    for s, alpha in zip(cert.states, cert.strategy):
        betas = []
        for b in G.max_actions(s)[alpha]:
            tr = []
            for j, p in b.transitions:
                if p and j not in pos:
                    raise GadgetError(f"strategy leaves the state set at {s}")
                if p:
                    tr.append((pos[j], p))
            betas.append(MinAction(b.payoff, tuple(tr)))
        acts.append((tuple(betas),))
    return StochGame(tuple(acts))


def verify_dominion(G: StochGame, cert: DominionCertificate) -> bool:
    if not cert.states or len(cert.states) != len(cert.strategy) or len(cert.c) != len(cert.states):
        return False
    try:
        H = restricted_game(G, cert)
    except GadgetError:
        return False
    return verify_certificate(H, GameCertificate("strict_super", cert.c))


@dataclass(frozen=True)
class Feasible:
    c: tuple[Fraction, ...]
    kind: str = field(default="feasible", init=False)


@dataclass(frozen=True)
class Infeasible:
    evidence: DominionCertificate
    kind: str = field(default="infeasible", init=False)


@dataclass(frozen=True)
class CSPUnresolved:
    bounds: tuple[Fraction, Fraction]
    kind: str = field(default="unresolved", init=False)


def csp_feasibility(csp: CSPInstance, max_iters: int = 10_000):
    """Feasible iff every mean payoff of the constraint game is <= 0."""
    _require_valid(csp)
    G = constraint_game(csp)
    dec = decide_sign(G, max_iters)
    if dec.nonpositive:
        c = dec.certificate.c
        if not feasible_witness_check(csp, c):
            raise AssertionError("sub-certificate does not satisfy the constraints")
        return Feasible(tuple(c))
    if dec.positive:
        # the whole state set, with MAX playing a best reply at c
        c = dec.certificate.c
        strat = tuple(max(range(len(bs)), key=lambda al, bs=bs: min(b.value(c) for b in bs[al]))
                      for bs in (G.max_actions(i) for i in range(csp.n)))
        cert = DominionCertificate(tuple(range(csp.n)), strat, tuple(c))
        if verify_dominion(G, cert):
            return Infeasible(cert)
    ev = _dominion_from_strategies(G, max_iters)
    if ev is not None:
        return Infeasible(ev)
    return CSPUnresolved(dec.bounds)


def _dominion_from_strategies(G: StochGame, max_iters: int) -> DominionCertificate | None:
    sol = strategy_iteration(G)
    if sol is None:
        return None
    top = max(sol.gain)
    if top <= 0:
        return None
    S = tuple(i for i in range(G.n) if sol.gain[i] == top)
    strat = tuple(sol.sigma[i] for i in S)
    probe = DominionCertificate(S, strat, tuple(Fraction(0) for _ in S))
    try:
        H = restricted_game(G, probe)
    except GadgetError:
        return None
    dec = decide_sign(H, max_iters)
    if not dec.positive:
        return None
    cert = DominionCertificate(S, strat, tuple(dec.certificate.c))
    return cert if verify_dominion(G, cert) else None


# --------------------------------------------------------------------------
# the generalized instance


def _t(t: Triple) -> str:
    return ",".join(map(str, t))


@dataclass(frozen=True)
class GeneralizedInstance:
    csp: CSPInstance
    M: int
    graph: MetricGraph
    functions: tuple[TropFunction, ...]
    provenance: tuple[tuple[str, str], ...]

    def family_index(self) -> dict[str, int]:
        return {f.name: k for k, f in enumerate(self.functions)}

    def coefficients(self, c, c_plus, c_minus, d, dprime) -> list[Fraction]:
        """Order the vectors of Property D like ``functions``.

        ``c`` is a sequence over the variables; ``c_plus`` and ``c_minus``
        map average triples, ``d`` maps minimum triples and ``dprime`` maps
        ordered pairs to their coefficient.
        """
        csp = self.csp
        if len(c) != csp.n:
            raise GadgetError("c needs one entry per variable")
        for name, mp, keys in (("c+", c_plus, csp.avg), ("c-", c_minus, csp.avg),
                               ("d", d, csp.mins), ("d'", dprime, csp.pairs)):
            if set(mp) != set(keys):
                raise GadgetError(f"{name} must have exactly one entry per constraint")
        out = [to_rational(x) for x in c]
        for t in csp.avg:
            out += [to_rational(c_plus[t]), to_rational(c_minus[t])]
        out += [to_rational(d[t]) for t in csp.mins]
        out += [to_rational(dprime[p]) for p in csp.pairs]
        return out


def csp_to_generalized(csp: CSPInstance) -> GeneralizedInstance:
    _require_valid(csp)
    n, M = csp.n, csp.M
    a = csp.a_map
    verts: list[str] = []
    edges: list[Edge] = []
    prov: list[tuple[str, str]] = []
    for t in csp.avg:
        lo, hi = f"E[{_t(t)}]-", f"E[{_t(t)}]+"
        verts += [lo, hi]
        edges.append(Edge(f"E[{_t(t)}]", lo, hi, Fraction(2 * M)))
        prov.append((f"E_{{{_t(t)}}}", f"E[{_t(t)}]"))
    for t in csp.mins:
        verts += [f"v[{_t(t)}]", f"v'[{_t(t)}]"]
        prov += [(f"v_{{{_t(t)}}}", f"v[{_t(t)}]"), (f"v'_{{{_t(t)}}}", f"v'[{_t(t)}]")]
    for p in csp.pairs:
        verts += [f"w[{_t(p)}]", f"w'[{_t(p)}]"]
        prov += [(f"w_{{{_t(p)}}}", f"w[{_t(p)}]"), (f"w'_{{{_t(p)}}}", f"w'[{_t(p)}]")]
    g = MetricGraph.build(verts, edges, basepoint=verts[0] if verts else None)
    L = Fraction(2 * M)

    def on_edge(t, slope_x):
        # value slope_x * x in the chart x = offset - M
        return EdgeProfile.affine(f"E[{_t(t)}]", L, slope_x, -slope_x * M)

    fs: list[TropFunction] = []
    for i in range(1, n + 1):
        profs = []
        for t in csp.avg:
            l, j, k = t
            if i == l:
                profs.append(on_edge(t, 0))
            elif i == j:
                profs.append(on_edge(t, -1))
            elif i == k:
                profs.append(on_edge(t, 1))
        iso: dict[str, Fraction] = {}
        for t in csp.mins:
            if i in t:
                iso[f"v[{_t(t)}]"] = Fraction(0)
            if i in t[1:]:
                iso[f"v'[{_t(t)}]"] = Fraction(0)
        for (p, q) in csp.pairs:
            if p == i:
                iso[f"w[{p},{q}]"] = Fraction(0)
            if q == i:
                iso[f"w[{p},{q}]"] = Fraction(a[p, q])
                iso[f"w'[{p},{q}]"] = Fraction(a[p, q])
        fs.append(TropFunction.make(g, profs, iso, name=f"f{i}"))
        prov.append((f"f_{i}", f"f{i}"))
    for t in csp.avg:
        fs.append(TropFunction.make(g, [on_edge(t, -1)], name=f"f+[{_t(t)}]"))
        fs.append(TropFunction.make(g, [on_edge(t, 1)], name=f"f-[{_t(t)}]"))
        prov += [(f"f^+_{{{_t(t)}}}", f"f+[{_t(t)}]"), (f"f^-_{{{_t(t)}}}", f"f-[{_t(t)}]")]
    for t in csp.mins:
        fs.append(TropFunction.make(g, [], {f"v[{_t(t)}]": 0, f"v'[{_t(t)}]": 0}, name=f"g[{_t(t)}]"))
        prov.append((f"g_{{{_t(t)}}}", f"g[{_t(t)}]"))
    for p in csp.pairs:
        fs.append(TropFunction.make(g, [], {f"w[{_t(p)}]": 0, f"w'[{_t(p)}]": 0}, name=f"h[{_t(p)}]"))
        prov.append((f"h_{{{_t(p)}}}", f"h[{_t(p)}]"))
    return GeneralizedInstance(csp, M, g, tuple(fs), tuple(prov))


@dataclass(frozen=True)
class CompletedInstance:
    source: GeneralizedInstance
    graph: MetricGraph
    functions: tuple[TropFunction, ...]
    added_edges: tuple[str, ...]

    @property
    def M(self) -> int:
        return self.source.M

    def coefficients(self, *args, **kw):
        return self.source.coefficients(*args, **kw)


def completion_profile(eid: str, A, B, M: int) -> EdgeProfile:
    """``min(A + 3M(x + 1), B - 3M(x - 1))`` on the chart ``x in [-1, 1]`` of a length-2 edge."""
    A, B = to_rational(A), to_rational(B)
    s = 3 * M
    t = (B - A + 2 * s) / (2 * s)   # offset where the two lines meet
    if not 0 < t < 2:
        raise GadgetError("endpoint values too far apart for the completion slopes")
    return EdgeProfile(eid, (Fraction(0), t, Fraction(2)), (s, -s), A)


def complete_instance(gi: GeneralizedInstance) -> CompletedInstance:
    g0 = gi.graph
    M = gi.M
    big = Fraction(4 * M)
    joined = {frozenset((e.end0, e.end1)) for e in g0.edges}
    added: list[Edge] = []
    for u, v in itertools.combinations(g0.vertices, 2):
        if frozenset((u, v)) not in joined:
            added.append(Edge(f"X[{u}|{v}]", u, v, Fraction(2)))
    g = MetricGraph.build(g0.vertices, list(g0.edges) + added, basepoint=g0.basepoint)
    if not g.connected:
        raise AssertionError("completed graph is not connected")
    out = []
    for f in gi.functions:
        profs = []
        for e in g0.edges:
            p = f.profile(e.id)
            profs.append(p if p is not None else EdgeProfile.affine(e.id, e.length, 0, big))
        vals = {}
        for v in g0.vertices:
            x = f.vertex_values.get(v, INF)
            vals[v] = big if is_inf(x) else x
            if not -M <= vals[v] <= 4 * M:
                raise AssertionError(f"value {vals[v]} at {v} outside [-M, 4M]")
        for e in added:
            profs.append(completion_profile(e.id, vals[e.end0], vals[e.end1], M))
        iso = {v: vals[v] for v in g0.vertices if g0.degree(v) == 0}
        out.append(TropFunction.make(g, profs, iso, name=f.name))
    return CompletedInstance(gi, g, tuple(out), tuple(e.id for e in added))


# --------------------------------------------------------------------------
# Property D


def property_D_check(instance: GeneralizedInstance | CompletedInstance, c, c_plus, c_minus, d,
                     dprime) -> bool:
    coeffs = instance.coefficients(c, c_plus, c_minus, d, dprime)
    return min_attained_twice(list(instance.functions), coeffs).ok


@dataclass(frozen=True)
class PropertyDVectors:
    c: tuple[Fraction, ...]
    c_plus: dict
    c_minus: dict
    d: dict
    dprime: dict

    def as_args(self):
        return self.c, self.c_plus, self.c_minus, self.d, self.dprime


def lemma_assignments(csp: CSPInstance, c: Sequence) -> PropertyDVectors:
    """Coefficients turning a feasible point into a witness of Property D.

    ``c`` is first translated so that its minimum is 0; then
    ``c+ = c_j``, ``c- = c_k`` on average constraints, ``d = min(c_j, c_k)``
    on minimum constraints and ``d' = a_ij + c_j`` on pairs.
    """
    c = [to_rational(x) for x in c]
    base = min(c)
    c = [x - base for x in c]
    a = csp.a_map
    cp = {t: c[t[1] - 1] for t in csp.avg}
    cm = {t: c[t[2] - 1] for t in csp.avg}
    d = {t: min(c[t[1] - 1], c[t[2] - 1]) for t in csp.mins}
    dp = {p: a[p] + c[p[1] - 1] for p in csp.pairs}
    return PropertyDVectors(tuple(c), cp, cm, d, dp)


def within_bound_boxes(M: int, vec: PropertyDVectors) -> bool:
    """``c, c+, c-, d`` in ``[0, M]`` and ``d'`` in ``[-M, M]``."""
    box = lambda x: 0 <= x <= M  # noqa: E731
    return (all(box(x) for x in vec.c) and all(box(x) for x in vec.c_plus.values())
            and all(box(x) for x in vec.c_minus.values()) and all(box(x) for x in vec.d.values())
            and all(-M <= x <= M for x in vec.dprime.values()))


# --------------------------------------------------------------------------
# the matrix gadget


@dataclass(frozen=True)
class MatrixGadget:
    graph: MetricGraph
    module: Semimodule
    B: EvalMatrix


def matrix_gadget(A: Sequence[Sequence[int]]) -> MatrixGadget:
    """Complete graph on the rows of a 0/1 matrix, edges of length 2.

    Generator ``f_j`` takes the value ``A[i][j]`` at ``v_i`` and
    ``min(A[i][j], A[s][j])`` at the midpoint ``w_is`` of the edge
    ``v_i v_s``, and is affine in between.
    """
    m = len(A)
    if m < 2:
        raise GadgetError("need at least two rows")
    ncols = len(A[0])
    if ncols < 1 or any(len(r) != ncols for r in A):
        raise GadgetError("ragged or empty matrix")
    for r in A:
        for x in r:
            if x not in (0, 1) or isinstance(x, bool):
                raise GadgetError(f"entry {x!r} is not 0 or 1")
    verts = [f"v{i}" for i in range(1, m + 1)]
    edges = [(f"e[{i},{s}]", f"v{i}", f"v{s}", 2)
             for i, s in itertools.combinations(range(1, m + 1), 2)]
    g = MetricGraph.build(verts, edges)
    gens = []
    for j in range(ncols):
        profs = []
        for i, s in itertools.combinations(range(1, m + 1), 2):
            x, y = A[i - 1][j], A[s - 1][j]
            profs.append(EdgeProfile.from_points(f"e[{i},{s}]", [(0, x), (1, min(x, y)), (2, y)]))
        gens.append(TropFunction.make(g, profs, name=f"f{j + 1}"))
    M = Semimodule.of(gens)
    pts = [Vertex(v) for v in verts]
    pts += [Interior(f"e[{i},{s}]", Fraction(1)) for i, s in itertools.combinations(range(1, m + 1), 2)]
    return MatrixGadget(g, M, evaluation_matrix(M, pts))
