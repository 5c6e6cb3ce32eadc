"""Piecewise-linear functions with integer slopes on a metric graph.

A :class:`TropFunction` is stored edge by edge.  Every supported edge carries
an :class:`EdgeProfile` in the edge's own offset coordinate ``t in [0, L]``
(oriented from ``end0`` to ``end1``).  Vertices that touch no supported edge
can still carry a finite value through the ``isolated`` table.  Everything
else has value ``INF``.

Profiles are kept canonical (adjacent pieces with equal slope are merged) so
that structural equality is the same thing as equality of functions.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .exact import INF, is_inf, to_extended, to_rational
from .graph import GraphError, Interior, MetricGraph, PointRef, Vertex, canonical_point


class FunctionError(ValueError):
    pass


# --------------------------------------------------------------------------
# edge profiles


@dataclass(frozen=True)
class EdgeProfile:
    edge: str
    breaks: tuple[Fraction, ...]
    slopes: tuple[int, ...]
    start_value: Fraction

    def __post_init__(self):
        if len(self.breaks) != len(self.slopes) + 1 or not self.slopes:
            raise FunctionError(f"edge {self.edge!r}: need k+1 breaks for k slopes (k >= 1)")
        if self.breaks[0] != 0:
            raise FunctionError(f"edge {self.edge!r}: first break must be 0")
        for a, b in zip(self.breaks, self.breaks[1:]):
            if not a < b:
                raise FunctionError(f"edge {self.edge!r}: breaks must increase strictly")
        for s in self.slopes:
            if isinstance(s, bool) or not isinstance(s, int):
                raise FunctionError(f"edge {self.edge!r}: slope {s!r} is not an integer")

    @property
    def length(self) -> Fraction:
        return self.breaks[-1]

    @cached_property
    def values(self) -> tuple[Fraction, ...]:
        """Values at the breaks."""
        out = [self.start_value]
        for s, a, b in zip(self.slopes, self.breaks, self.breaks[1:]):
            out.append(out[-1] + s * (b - a))
        return tuple(out)

    @property
    def end_value(self) -> Fraction:
        return self.values[-1]

    def piece_index(self, t) -> int:
        """Index of a piece containing ``t`` (the right-hand piece at an interior break)."""
        if t < 0 or t > self.length:
            raise FunctionError(f"offset {t} outside edge {self.edge!r}")
        return min(bisect_right(self.breaks, t) - 1, len(self.slopes) - 1)

    def value_at(self, t) -> Fraction:
        k = self.piece_index(t)
        return self.values[k] + self.slopes[k] * (t - self.breaks[k])

    def affine_on(self, k: int) -> tuple[int, Fraction]:
        """``(m, eta)`` with value ``m*t + eta`` on piece ``k``."""
        m = self.slopes[k]
        return m, self.values[k] - m * self.breaks[k]

    def shifted(self, c) -> "EdgeProfile":
        return EdgeProfile(self.edge, self.breaks, self.slopes, self.start_value + c)

    @classmethod
    def affine(cls, edge: str, length, slope: int, start_value=0) -> "EdgeProfile":
        return cls(edge, (Fraction(0), to_rational(length)), (slope,), to_rational(start_value))

    @classmethod
    def from_points(cls, edge: str, points: Iterable[tuple]) -> "EdgeProfile":
        """Interpolate ``(offset, value)`` pairs; the first offset must be 0.

        Consecutive collinear points are merged; a non-integral slope raises.
        """
        pts = [(to_rational(t), to_rational(v)) for t, v in points]
        if len(pts) < 2:
            raise FunctionError(f"edge {edge!r}: need at least two points")
        breaks = [pts[0][0]]
        slopes: list[int] = []
        for (a, va), (b, vb) in zip(pts, pts[1:]):
            if not a < b:
                raise FunctionError(f"edge {edge!r}: offsets must increase strictly")
            s = (vb - va) / (b - a)
            if s.denominator != 1:
                raise FunctionError(f"edge {edge!r}: slope {s} on [{a}, {b}] is not an integer")
            s = int(s)
            if slopes and slopes[-1] == s:
                breaks[-1] = b
            else:
                slopes.append(s)
                breaks.append(b)
        return cls(edge, tuple(breaks), tuple(slopes), pts[0][1])

    def points(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.breaks, self.values))


def _min2(p: EdgeProfile, q: EdgeProfile) -> EdgeProfile:
    """Pointwise minimum of two profiles on the same edge."""
    ts = sorted(set(p.breaks) | set(q.breaks))
    pts = []
    for a, b in zip(ts, ts[1:]):
        pa, qa = p.value_at(a), q.value_at(a)
        pts.append((a, min(pa, qa)))
        da, db = pa - qa, p.value_at(b) - q.value_at(b)
        if da * db < 0:
            # both are affine on [a, b]; the difference changes sign inside
            x = a + (b - a) * da / (da - db)
            pts.append((x, p.value_at(x)))
    b = ts[-1]
    pts.append((b, min(p.value_at(b), q.value_at(b))))
    return EdgeProfile.from_points(p.edge, pts)


def lower_envelope(profiles: Sequence[EdgeProfile]) -> EdgeProfile:
    if not profiles:
        raise FunctionError("envelope of no profiles")
    out = profiles[0]
    for p in profiles[1:]:
        out = _min2(out, p)
    return out


# --------------------------------------------------------------------------
# functions


@dataclass(frozen=True)
class TropFunction:
    graph: MetricGraph = field(repr=False)
    profiles: tuple[EdgeProfile, ...]
    isolated: tuple[tuple[str, Fraction], ...] = ()
    name: str = field(default="", compare=False)

    @classmethod
    def make(cls, graph: MetricGraph, profiles=(), isolated: Mapping | None = None,
             name: str = "") -> "TropFunction":
        """Validate and canonicalize.

        ``profiles`` is an iterable of :class:`EdgeProfile` or a mapping from
        edge id to profile.  ``isolated`` maps vertex ids to finite values.
        """
        if isinstance(profiles, Mapping):
            profiles = profiles.values()
        by_edge: dict[str, EdgeProfile] = {}
        for p in profiles:
            e = graph.edge(p.edge)
            if p.edge in by_edge:
                raise FunctionError(f"two profiles for edge {p.edge!r}")
            if p.length != e.length:
                raise FunctionError(
                    f"profile for edge {p.edge!r} has length {p.length}, edge has {e.length}")
            by_edge[p.edge] = p
        vertex_vals: dict[str, Fraction] = {}
        for eid, p in by_edge.items():
            e = graph.edge_map[eid]
            for v, val in ((e.end0, p.start_value), (e.end1, p.end_value)):
                old = vertex_vals.setdefault(v, val)
                if old != val:
                    raise FunctionError(f"inconsistent values {old} and {val} at vertex {v!r}")
        iso: dict[str, Fraction] = {}
        for v, val in (isolated or {}).items():
            v = str(v)
            if v not in graph.vertex_index:
                raise FunctionError(f"unknown vertex {v!r}")
            val = to_extended(val)
            if is_inf(val):
                continue
            if v in vertex_vals:
                if vertex_vals[v] != val:
                    raise FunctionError(
                        f"isolated value {val} at {v!r} disagrees with incident edges ({vertex_vals[v]})")
                continue
            iso[v] = val
        ordered = tuple(sorted(by_edge.values(), key=lambda p: graph.edge_index[p.edge]))
        iso_t = tuple(sorted(iso.items(), key=lambda kv: graph.vertex_index[kv[0]]))
        return cls(graph, ordered, iso_t, name)

    @cached_property
    def edge_profiles(self) -> dict[str, EdgeProfile]:
        return {p.edge: p for p in self.profiles}

    @cached_property
    def vertex_values(self) -> dict[str, Fraction]:
        out = dict(self.isolated)
        for p in self.profiles:
            e = self.graph.edge_map[p.edge]
            out[e.end0] = p.start_value
            out[e.end1] = p.end_value
        return out

    def profile(self, eid: str) -> EdgeProfile | None:
        return self.edge_profiles.get(eid)

    @property
    def is_total(self) -> bool:
        return (len(self.profiles) == len(self.graph.edges)
                and len(self.vertex_values) == len(self.graph.vertices))

    @property
    def is_infinite(self) -> bool:
        return not self.profiles and not self.isolated

    def named(self, name: str) -> "TropFunction":
        return TropFunction(self.graph, self.profiles, self.isolated, name)

    def __call__(self, p: PointRef):
        return evaluate(self, p)


def constant(graph: MetricGraph, c=0, name: str = "") -> TropFunction:
    c = to_rational(c)
    profs = [EdgeProfile.affine(e.id, e.length, 0, c) for e in graph.edges]
    iso = {v: c for v in graph.vertices}
    return TropFunction.make(graph, profs, iso, name)


def infinity(graph: MetricGraph, name: str = "") -> TropFunction:
    return TropFunction(graph, (), (), name)


def dirac(graph: MetricGraph, vertex: str, name: str = "") -> TropFunction:
    """The function that is 0 at ``vertex`` and INF everywhere else."""
    if graph.degree(vertex):
        raise FunctionError("a finite value at a vertex with incident edges forces edge values too")
    return TropFunction.make(graph, (), {vertex: 0}, name)


def _check_same_graph(fs: Sequence[TropFunction]):
    g = fs[0].graph
    for f in fs[1:]:
        if f.graph is not g and f.graph != g:
            raise FunctionError("functions live on different graphs")
    return g


def evaluate(f: TropFunction, p: PointRef):
    g = f.graph
    if not g.contains(p):
        raise GraphError(f"point {p} is not on the graph")
    if isinstance(p, Vertex):
        return f.vertex_values.get(p.id, INF)
    prof = f.edge_profiles.get(p.edge)
    return INF if prof is None else prof.value_at(p.offset)


def shift(f: TropFunction, c) -> TropFunction:
    """Tropical multiplication by the constant ``c`` (which may be INF)."""
    c = to_extended(c)
    if is_inf(c):
        return infinity(f.graph, f.name)
    return TropFunction(f.graph, tuple(p.shifted(c) for p in f.profiles),
                        tuple((v, x + c) for v, x in f.isolated), f.name)


def trop_min(f: TropFunction, *others: TropFunction) -> TropFunction:
    """Pointwise minimum of ``f`` and ``others``; support is the union of supports."""
    fs = (f,) + others
    g = _check_same_graph(fs)
    profs = []
    for e in g.edges:
        ps = [h.edge_profiles[e.id] for h in fs if e.id in h.edge_profiles]
        if ps:
            profs.append(lower_envelope(ps))
    iso: dict[str, Fraction] = {}
    covered = {v for p in profs for v in (g.edge_map[p.edge].end0, g.edge_map[p.edge].end1)}
    for h in fs:
        for v, x in h.isolated:
            if v not in covered:
                iso[v] = min(iso.get(v, x), x)
    return TropFunction.make(g, profs, iso)


# --------------------------------------------------------------------------
# divisors


def _point_sort_key(p: PointRef):
    if isinstance(p, Vertex):
        return (0, p.id, Fraction(0))
    return (1, p.edge, p.offset)


@dataclass(frozen=True)
class Divisor:
    coefficients: tuple[tuple[PointRef, int], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[PointRef, int] | Iterable[tuple[PointRef, int]] = ()) -> "Divisor":
        acc: dict[PointRef, int] = {}
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        for p, k in items:
            if isinstance(k, bool) or not isinstance(k, int):
                raise FunctionError(f"divisor coefficient {k!r} is not an integer")
            acc[p] = acc.get(p, 0) + k
        return cls(tuple(sorted(((p, k) for p, k in acc.items() if k), key=lambda pk: _point_sort_key(pk[0]))))

    def as_dict(self) -> dict[PointRef, int]:
        return dict(self.coefficients)

    def __getitem__(self, p: PointRef) -> int:
        return self.as_dict().get(p, 0)

    @property
    def degree(self) -> int:
        return sum(k for _, k in self.coefficients)

    @property
    def is_effective(self) -> bool:
        return all(k >= 0 for _, k in self.coefficients)

    @property
    def support(self) -> tuple[PointRef, ...]:
        return tuple(p for p, _ in self.coefficients)

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor.of(list(self.coefficients) + list(other.coefficients))

    def __neg__(self) -> "Divisor":
        return Divisor.of([(p, -k) for p, k in self.coefficients])

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)


def divisor_of(f: TropFunction) -> Divisor:
    """``ord_x(f)``: minus the sum of the outgoing slopes at ``x``, over all points."""
    g = f.graph
    if f.is_infinite or not f.is_total:
        raise FunctionError("divisor_of needs a total function")
    if not g.connected:
        raise FunctionError("divisor_of needs a connected graph")
    coeff: dict[PointRef, int] = {}
    for e in g.edges:
        p = f.edge_profiles[e.id]
        # leaving end0 toward end1 the outgoing slope is s_1; leaving end1 it is -s_k
        coeff[Vertex(e.end0)] = coeff.get(Vertex(e.end0), 0) - p.slopes[0]
        coeff[Vertex(e.end1)] = coeff.get(Vertex(e.end1), 0) + p.slopes[-1]
        for t, left, right in zip(p.breaks[1:-1], p.slopes, p.slopes[1:]):
            coeff[Interior(e.id, t)] = left - right
    return Divisor.of(coeff)


def in_riemann_roch(f: TropFunction, D: Divisor) -> bool:
    if f.is_infinite:
        return True
    return (divisor_of(f) + D).is_effective


# --------------------------------------------------------------------------
# refinement into affine segments


@dataclass(frozen=True)
class Segment:
    """A closed piece of an edge on which every listed function is affine.

    ``data[j]`` is ``(m, eta)`` with ``f_j(t) = m*t + eta`` in the edge's
    offset coordinate, or ``None`` when ``f_j`` is INF there.  A degenerate
    segment with ``vertex`` set stands for an edgeless vertex (``u = v = 0``).
    """

    edge: str | None
    u: Fraction
    v: Fraction
    data: tuple[tuple[int, Fraction] | None, ...]
    vertex: str | None = None

    def point(self, graph: MetricGraph, t) -> PointRef:
        if self.vertex is not None:
            return Vertex(self.vertex)
        return canonical_point(graph, self.edge, t)

    def value(self, j: int, t):
        d = self.data[j]
        return INF if d is None else d[0] * t + d[1]


def common_refinement(fs: Sequence[TropFunction]) -> list[Segment]:
    g = _check_same_graph(fs)
    segs: list[Segment] = []
    for e in g.edges:
        profs = [f.edge_profiles.get(e.id) for f in fs]
        if all(p is None for p in profs):
            continue
        ts = sorted({t for p in profs if p is not None for t in p.breaks})
        for a, b in zip(ts, ts[1:]):
            data = []
            for p in profs:
                if p is None:
                    data.append(None)
                else:
                    data.append(p.affine_on(p.piece_index(a)))
            segs.append(Segment(e.id, a, b, tuple(data)))
    for v in g.vertices:
        # vertices reached only through the isolated table get their own point segment
        vals = [f.vertex_values.get(v, INF) for f in fs]
        if any(not is_inf(x) for x in vals) and not any(
                e_id in f.edge_profiles for f in fs for e_id, _ in g.incidence[v]):
            segs.append(Segment(None, Fraction(0), Fraction(0),
                                tuple(None if is_inf(x) else (0, x) for x in vals), vertex=v))
    return segs


# --------------------------------------------------------------------------
# "minimum attained at least twice"


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: PointRef | None = None

    def __bool__(self):
        return self.ok


def min_attained_twice(fs: Sequence[TropFunction], cs: Sequence) -> Verdict:
    """Check that ``min_j (f_j + c_j)`` is attained by at least two indices at every point."""
    if len(fs) < 2:
        raise FunctionError("min_attained_twice needs at least two functions")
    if len(fs) != len(cs):
        raise FunctionError("one coefficient per function is required")
    g = _check_same_graph(fs)
    pairs = [(f, c) for f, c in zip(fs, map(to_extended, cs)) if not is_inf(c)]
    for e in g.edges:
        ps = [(f.edge_profiles[e.id], c) for f, c in pairs if e.id in f.edge_profiles]
        if not ps:
            continue
        D = math.lcm(*(x.denominator for p, c in ps for x in (*p.breaks, p.start_value + c)))
        ts = sorted({int(t * D) for p, _ in ps for t in p.breaks})
        table = [_values_along(p, c, ts, D) for p, c in ps]
        for k, (a, b) in enumerate(zip(ts, ts[1:])):
            lines: dict[tuple[int, int], int] = {}
            for vals in table:
                key = (vals[k], vals[k + 1])
                lines[key] = lines.get(key, 0) + 1
            s = _lonely_envelope_piece(lines)
            if s is not None:
                return Verdict(False, Interior(e.id, (a + (b - a) * s) / D))
    for v in g.vertices:
        vals = [f.vertex_values[v] + c for f, c in pairs if v in f.vertex_values]
        vals += [INF] * (len(fs) - len(vals))
        m = min(vals)
        if is_inf(m):
            continue
        if sum(1 for x in vals if x == m) < 2:
            return Verdict(False, Vertex(v))
    return Verdict(True)


def _values_along(p: EdgeProfile, c: Fraction, ts: Sequence[int], D: int) -> list[int]:
    """Values of ``p + c`` at the increasing offsets ``ts``, in one pass.

    Offsets and values are scaled by ``D``, which must clear the
    denominators of the breaks and of the shifted start value (slopes are
    integers).
    """
    breaks = [int(b * D) for b in p.breaks]
    out = []
    k, last = 0, len(p.slopes) - 1
    v = int((p.start_value + c) * D)
    for t in ts:
        while k < last and breaks[k + 1] <= t:
            v += p.slopes[k] * (breaks[k + 1] - breaks[k])
            k += 1
        out.append(v + p.slopes[k] * (t - breaks[k]))
    return out


def _lonely_envelope_piece(lines: Mapping[tuple[int, int], int]) -> Fraction | None:
    """Where the minimum of some affine pieces is attained only once, if anywhere.

    Each key is a line on ``[0, 1]`` given by its end values and maps to
    its multiplicity.  The lower envelope is traced from 0 to 1; the
    returned parameter lies inside an envelope piece of multiplicity one.
    """
    def slope(ln):
        return ln[1] - ln[0]

    s0 = Fraction(0)
    cur = min(lines, key=lambda ln: (ln[0], slope(ln)))
    while True:
        best = None
        for ln in lines:
            ds = slope(cur) - slope(ln)
            if ds <= 0:
                continue
            # cur(s) = ln(s) where cur[0] + slope(cur) s = ln[0] + slope(ln) s
            x = Fraction(ln[0] - cur[0], ds)
            if x > s0 and (best is None or (x, slope(ln)) < best[:2]):
                best = (x, slope(ln), ln)
        end = best[0] if best is not None and best[0] < 1 else Fraction(1)
        if lines[cur] < 2:
            return (s0 + end) / 2
        if end >= 1:
            return None
        s0, cur = end, best[2]


def breakpoints(f: TropFunction) -> list[PointRef]:
    """Vertices in the support followed by interior breaks, in graph order."""
    g = f.graph
    pts: list[PointRef] = [Vertex(v) for v in g.vertices if v in f.vertex_values]
    for p in f.profiles:
        pts.extend(Interior(p.edge, t) for t in p.breaks[1:-1])
    return pts
