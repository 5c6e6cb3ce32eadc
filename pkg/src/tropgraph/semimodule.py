"""Finitely generated min-plus semimodules of functions on a metric graph."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import INF, is_inf, to_extended, to_rational
from .functions import (FunctionError, TropFunction, evaluate, infinity, shift, trop_min)
from .graph import Interior, MetricGraph, PointRef, Vertex


@dataclass(frozen=True)
class Semimodule:
    graph: MetricGraph
    generators: tuple[TropFunction, ...]

    def __post_init__(self):
        if not self.generators:
            raise FunctionError("a semimodule needs at least one generator")
        for f in self.generators:
            if f.graph is not self.graph and f.graph != self.graph:
                raise FunctionError("generator on a different graph")
            if not f.is_total:
                raise FunctionError(f"generator {f.name or '?'} is not total")

    @classmethod
    def of(cls, generators: Sequence[TropFunction]) -> "Semimodule":
        gens = tuple(generators)
        if not gens:
            raise FunctionError("a semimodule needs at least one generator")
        return cls(gens[0].graph, gens)

    def __len__(self):
        return len(self.generators)


def combine(M: Semimodule, cs: Sequence) -> TropFunction:
    """``min_j (g_j + c_j)``; an INF coefficient drops its generator.

    With every coefficient INF the result is the INF function (check
    ``result.is_infinite``).
    """
    if len(cs) != len(M.generators):
        raise FunctionError("one coefficient per generator is required")
    terms = [shift(g, c) for g, c in zip(M.generators, cs) if not is_inf(to_extended(c))]
    if not terms:
        return infinity(M.graph)
    return trop_min(*terms) if len(terms) > 1 else terms[0]


@dataclass(frozen=True)
class EvalMatrix:
    points: tuple[PointRef, ...]
    rows: tuple[tuple[Fraction, ...], ...]


def evaluation_matrix(M: Semimodule, points: Sequence[PointRef]) -> EvalMatrix:
    rows = tuple(tuple(evaluate(f, p) for f in M.generators) for p in points)
    return EvalMatrix(tuple(points), rows)


def section_rho(M: Semimodule, points: Sequence[PointRef], g: Sequence) -> TropFunction:
    """``min_i (f_i + c_i)`` with ``c_i = max_k (g_k - f_i(x_k))``."""
    if len(points) != len(g):
        raise FunctionError("one value per point is required")
    if not points:
        raise FunctionError("at least one point is required")
    g = [to_rational(x) for x in g]
    E = evaluation_matrix(M, points).rows
    cs = [max(g[k] - E[k][i] for k in range(len(points))) for i in range(len(M.generators))]
    return combine(M, cs)


# --------------------------------------------------------------------------
# slopes


@dataclass(frozen=True)
class SlopeProfile:
    """``sets[(edge, a, b, sign)]``: generator slopes on the refined edge ``[a, b]``.

    ``sign = +1`` reads slopes in the direction of increasing offset and
    ``sign = -1`` in the opposite direction.
    """

    sets: tuple[tuple[tuple[str, Fraction, Fraction, int], frozenset[int]], ...]

    def as_dict(self):
        return dict(self.sets)

    def max_size(self) -> int:
        return max((len(s) for _, s in self.sets), default=1)


def refined_breaks(M: Semimodule) -> dict[str, list[Fraction]]:
    """Per edge, the union of all generator breakpoints (including both ends)."""
    out = {}
    for e in M.graph.edges:
        out[e.id] = sorted({t for f in M.generators for t in f.edge_profiles[e.id].breaks})
    return out


def slope_profile(M: Semimodule) -> SlopeProfile:
    # Every element min_j (g_j + c_j) is, on a refined edge, a concave
    # combination of generator pieces, so its slopes are generator slopes;
    # conversely g_j's slope is realized by taking c_j far below the others.
    items = []
    for eid, ts in refined_breaks(M).items():
        for a, b in zip(ts, ts[1:]):
            mid = (a + b) / 2
            s = frozenset(f.edge_profiles[eid].slopes[f.edge_profiles[eid].piece_index(mid)]
                          for f in M.generators)
            items.append(((eid, a, b, +1), s))
            items.append(((eid, a, b, -1), frozenset(-x for x in s)))
    return SlopeProfile(tuple(items))


def rank_lower_bound_slopes(M: Semimodule) -> int:
    """Largest number of distinct generator slopes along a single direction."""
    return slope_profile(M).max_size()


def refined_vertices(M: Semimodule) -> list[PointRef]:
    pts: list[PointRef] = [Vertex(v) for v in M.graph.vertices]
    for eid, ts in refined_breaks(M).items():
        pts.extend(Interior(eid, t) for t in ts[1:-1])
    return pts


def two_slope_points(M: Semimodule) -> list[PointRef] | None:
    """Vertices of the refined model when every direction sees at most two slopes.

    With two slopes per refined edge an element changes slope at most once
    there, so its values at the two ends determine it on the whole edge.
    """
    if rank_lower_bound_slopes(M) > 2:
        return None
    return refined_vertices(M)
