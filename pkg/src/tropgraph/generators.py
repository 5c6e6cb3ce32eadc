"""Random test data: graphs, PL functions, families, constraint systems and games.

Every generator takes a :class:`random.Random` so runs are reproducible
from a seed.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .functions import EdgeProfile, TropFunction
from .gadgets import CSPInstance
from .games import MinAction, StochGame
from .graph import Edge, MetricGraph
from .semimodule import Semimodule, combine


def _rat(rng: random.Random, lo: int, hi: int, max_den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo * max_den, hi * max_den), rng.randint(1, max_den))


def random_graph(rng: random.Random, max_vertices: int = 4, max_edges: int = 4,
                 allow_loops: bool = True) -> MetricGraph:
    """A connected graph: a random spanning tree plus extra edges (parallel edges and loops allowed)."""
    nv = rng.randint(1, max_vertices)
    need = nv - 1
    if need == 0 and max_edges >= 1 and not allow_loops:
        nv, need = 2, 1
    m = max(need, rng.randint(max(1, need), max(1, max_edges)))
    verts = [f"v{k}" for k in range(nv)]
    edges = []
    for k in range(1, nv):
        edges.append((verts[rng.randrange(k)], verts[k]))
    while len(edges) < m:
        a, b = rng.choice(verts), rng.choice(verts)
        if a == b and not allow_loops:
            continue
        edges.append((a, b))
    es = [Edge(f"e{k}", a, b, Fraction(rng.randint(1, 8), rng.randint(1, 4))) for k, (a, b) in enumerate(edges)]
    return MetricGraph.build(verts, es)


def _closing_pieces(a: Fraction, b: Fraction, P: Fraction, Q: Fraction, rng: random.Random):
    """Two integer-slope pieces on ``[a, b]`` from value ``P`` to ``Q`` (one piece when possible)."""
    mean = (Q - P) / (b - a)
    if mean.denominator == 1 and rng.random() < 0.3:
        return [(b, Q)]
    s1 = int(mean // 1) + 1 + rng.randint(0, 2)
    s2 = -int((-mean) // 1) - 1 - rng.randint(0, 2)
    t = a + (Q - P - s2 * (b - a)) / (s1 - s2)
    return [(t, P + s1 * (t - a)), (b, Q)]


def random_profile(rng: random.Random, edge: Edge, A: Fraction, B: Fraction,
                   max_breaks: int = 3) -> EdgeProfile:
    """A random integer-slope profile on ``edge`` with prescribed end values."""
    L = edge.length
    k = rng.randint(0, max(0, max_breaks - 1))
    cuts = sorted({Fraction(rng.randint(1, 15), 16) * L / 2 for _ in range(k)})
    pts = [(Fraction(0), A)]
    for t in cuts:
        x0, y0 = pts[-1]
        pts.append((t, y0 + rng.randint(-3, 3) * (t - x0)))
    x0, y0 = pts[-1]
    pts += _closing_pieces(x0, L, y0, B, rng)
    return EdgeProfile.from_points(edge.id, pts)


def random_function(rng: random.Random, g: MetricGraph, max_breaks: int = 3, name: str = "") -> TropFunction:
    """A random total PL function with integer slopes."""
    vals = {v: _rat(rng, -3, 3) for v in g.vertices}
    profs = []
    for e in g.edges:
        for _ in range(20):
            p = random_profile(rng, e, vals[e.end0], vals[e.end1], max_breaks)
            if len(p.breaks) - 2 <= max_breaks:
                break
        profs.append(p)
    iso = {v: vals[v] for v in g.vertices if g.degree(v) == 0}
    return TropFunction.make(g, profs, iso, name)


def random_family(rng: random.Random, n: int, g: MetricGraph | None = None,
                  max_breaks: int = 3) -> list[TropFunction]:
    g = g or random_graph(rng)
    return [random_function(rng, g, max_breaks, f"f{k + 1}") for k in range(n)]


def independent_family(rng: random.Random, n: int, g: MetricGraph | None = None) -> list[TropFunction]:
    """Functions with pairwise distinct slopes on a common small interval.

    Near a point where all slopes differ, the family looks like ``n``
    affine functions with distinct slopes, and no choice of constants lets
    the minimum be attained twice on a whole interval.
    """
    g = g or random_graph(rng, 3, 3)
    e = rng.choice(g.edges)
    L = e.length
    lo, hi = L * Fraction(2, 5), L * Fraction(3, 5)
    slopes = rng.sample(range(-n - 2, n + 3), n)
    fs = []
    for k in range(n):
        vals = {v: _rat(rng, -3, 3) for v in g.vertices}
        profs = []
        for edge in g.edges:
            A, B = vals[edge.end0], vals[edge.end1]
            if edge.id != e.id:
                profs.append(random_profile(rng, edge, A, B, 2))
                continue
            P = _rat(rng, -3, 3)
            Q = P + slopes[k] * (hi - lo)
            pts = [(Fraction(0), A)] + _closing_pieces(Fraction(0), lo, A, P, rng)
            pts.append((hi, Q))
            pts += _closing_pieces(hi, L, Q, B, rng)
            profs.append(EdgeProfile.from_points(edge.id, pts))
        iso = {v: vals[v] for v in g.vertices if g.degree(v) == 0}
        fs.append(TropFunction.make(g, profs, iso, f"f{k + 1}"))
    return fs


def dependent_family(rng: random.Random, n: int, g: MetricGraph | None = None) -> list[TropFunction]:
    """``n - 1`` random functions and a tropical combination of them, in random order."""
    g = g or random_graph(rng, 3, 3)
    base = random_family(rng, n - 1, g, 2)
    cs = [_rat(rng, -2, 2) for _ in base]
    extra = combine(Semimodule.of(base), cs)
    fs = base + [extra]
    rng.shuffle(fs)
    return [f.named(f"f{k + 1}") for k, f in enumerate(fs)]


def random_semimodule(rng: random.Random, m: int, g: MetricGraph | None = None) -> Semimodule:
    g = g or random_graph(rng, 3, 3)
    return Semimodule.of(random_family(rng, m, g, 2))


# --------------------------------------------------------------------------
# constraint systems


def feasible_csp(rng: random.Random, n: int, n_avg: int | None = None,
                 n_min: int | None = None) -> tuple[CSPInstance, tuple[int, ...]]:
    """A constraint system satisfied by the returned integer point ``c``."""
    c = [rng.randint(0, 4) for _ in range(n)]
    triples = [t for t in itertools.permutations(range(1, n + 1), 3) if t[1] < t[2]]
    ok_avg = [t for t in triples if 2 * c[t[0] - 1] >= c[t[1] - 1] + c[t[2] - 1]]
    ok_min = [t for t in triples if c[t[0] - 1] >= min(c[t[1] - 1], c[t[2] - 1])]
    n_avg = rng.randint(0, 2) if n_avg is None else n_avg
    n_min = rng.randint(0, 2) if n_min is None else n_min
    avg = sorted(rng.sample(ok_avg, min(n_avg, len(ok_avg))))
    mins = sorted(rng.sample(ok_min, min(n_min, len(ok_min))))
    a = {(i, j): c[i - 1] - c[j - 1] - rng.randint(0, 2)
         for i, j in itertools.permutations(range(1, n + 1), 2)}
    return CSPInstance.make(n, avg, mins, a), tuple(c)


def infeasible_csp(rng: random.Random) -> CSPInstance:
    """Three variables where the average constraint contradicts the difference bounds.

    With ``c_i >= (c_j + c_k)/2``, ``c_j >= p + c_i`` and ``c_k >= q + c_i``
    and ``p + q > 0`` the average forces ``c_i >= c_i + (p + q)/2``.
    """
    i, j, k = rng.sample([1, 2, 3], 3)
    j, k = sorted((j, k))
    p = rng.randint(0, 2)
    q = rng.randint(1 - p, 2)
    a = {}
    for s, t in itertools.permutations((1, 2, 3), 2):
        a[(s, t)] = -rng.randint(2, 4)
    a[(j, i)], a[(i, j)] = p, -p - rng.randint(0, 1)
    a[(k, i)], a[(i, k)] = q, -q - rng.randint(0, 1)
    return CSPInstance.make(3, [(i, j, k)], [], a)


# --------------------------------------------------------------------------
# games


def random_game(rng: random.Random, max_states: int = 4, max_max: int = 3, max_min: int = 3,
                max_den: int = 4) -> StochGame:
    n = rng.randint(1, max_states)
    acts = []
    for _ in range(n):
        alphas = []
        for _ in range(rng.randint(1, max_max)):
            betas = []
            for _ in range(rng.randint(1, max_min)):
                den = rng.randint(1, max_den)
                cuts = sorted(rng.randint(0, den) for _ in range(rng.randint(0, 2)))
                parts = [b - a for a, b in zip([0] + cuts, cuts + [den])]
                trans: dict[int, Fraction] = {}
                for w in parts:
                    if w:
                        j = rng.randrange(n)
                        trans[j] = trans.get(j, Fraction(0)) + Fraction(w, den)
                betas.append(MinAction(Fraction(rng.randint(-3, 3)), tuple(sorted(trans.items()))))
            alphas.append(tuple(betas))
        acts.append(tuple(alphas))
    return StochGame(tuple(acts))


def random_vector(rng: random.Random, n: int, lo: int = -5, hi: int = 5) -> tuple[Fraction, ...]:
    return tuple(_rat(rng, lo, hi) for _ in range(n))

