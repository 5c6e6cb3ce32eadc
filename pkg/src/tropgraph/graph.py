"""Metric graphs given by a model (G, l) with rational edge lengths.

Points are referenced canonically: a vertex, or an interior point of an edge
at a rational offset measured from the edge's first endpoint.  Offsets
``0`` and ``length`` never appear in an :class:`Interior`; they are the
endpoint vertices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Union

from .exact import to_rational


@dataclass(frozen=True)
class Edge:
    id: str
    end0: str
    end1: str
    length: Fraction

    @property
    def is_loop(self) -> bool:
        return self.end0 == self.end1


@dataclass(frozen=True, order=True)
class Vertex:
    id: str

    def __str__(self):
        return self.id


@dataclass(frozen=True, order=True)
class Interior:
    edge: str
    offset: Fraction

    def __str__(self):
        return f"{self.edge}@{self.offset}"


PointRef = Union[Vertex, Interior]


@dataclass(frozen=True)
class Direction:
    """Unit tangent direction at ``at`` along edge ``edge``.

    ``sign`` is +1 when moving toward ``end1`` (increasing offset) and -1
    when moving toward ``end0``.
    """

    at: PointRef
    edge: str
    sign: int


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class ValidationReport:
    connected: bool
    errors: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    basepoint: str | None = None

    @classmethod
    def build(cls, vertices: Iterable[Hashable], edges: Iterable, basepoint=None,
              check: bool = True) -> "MetricGraph":
        """Build from plain data; ``edges`` holds ``(id, end0, end1, length)`` tuples or Edges."""
        vs = tuple(str(v) for v in vertices)
        es = []
        for e in edges:
            if not isinstance(e, Edge):
                eid, a, b, length = e
                e = Edge(str(eid), str(a), str(b), to_rational(length))
            es.append(e)
        if basepoint is None and vs:
            basepoint = vs[0]
        g = cls(vs, tuple(es), None if basepoint is None else str(basepoint))
        if check:
            report = validate_graph(g)
            if report.errors:
                raise GraphError("; ".join(report.errors))
        return g

    @cached_property
    def edge_map(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: k for k, v in enumerate(self.vertices)}

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {e.id: k for k, e in enumerate(self.edges)}

    @cached_property
    def incidence(self) -> dict[str, tuple[tuple[str, int], ...]]:
        # vertex -> (edge id, sign of the direction leaving the vertex)
        inc: dict[str, list] = {v: [] for v in self.vertices}
        for e in self.edges:
            inc.setdefault(e.end0, []).append((e.id, +1))
            inc.setdefault(e.end1, []).append((e.id, -1))
        return {v: tuple(x) for v, x in inc.items()}

    def edge(self, eid: str) -> Edge:
        try:
            return self.edge_map[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    def degree(self, v: str) -> int:
        return len(self.incidence.get(v, ()))

    @cached_property
    def connected(self) -> bool:
        return _is_connected(self)

    def contains(self, p: PointRef) -> bool:
        if isinstance(p, Vertex):
            return p.id in self.vertex_index
        e = self.edge_map.get(p.edge)
        return e is not None and 0 < p.offset < e.length

    def point_key(self, p: PointRef):
        """Sort key giving vertices in declaration order, then interior points by edge and offset."""
        if isinstance(p, Vertex):
            return (0, self.vertex_index[p.id], Fraction(0))
        return (1, self.edge_index[p.edge], p.offset)

    def endpoints(self, eid: str) -> tuple[Vertex, Vertex]:
        e = self.edge(eid)
        return Vertex(e.end0), Vertex(e.end1)


def _is_connected(g: MetricGraph) -> bool:
    if not g.vertices:
        return True
    adj: dict[str, set] = {v: set() for v in g.vertices}
    for e in g.edges:
        if e.end0 in adj and e.end1 in adj:
            adj[e.end0].add(e.end1)
            adj[e.end1].add(e.end0)
    seen = {g.vertices[0]}
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for w in adj[v] - seen:
            seen.add(w)
            queue.append(w)
    return len(seen) == len(g.vertices)


def validate_graph(g: MetricGraph) -> ValidationReport:
    """Collect every structural problem of ``g`` instead of stopping at the first."""
    errors = []
    seen_v = set()
    for v in g.vertices:
        if v in seen_v:
            errors.append(f"duplicate vertex id {v!r}")
        seen_v.add(v)
    seen_e = set()
    for e in g.edges:
        if e.id in seen_e:
            errors.append(f"duplicate edge id {e.id!r}")
        seen_e.add(e.id)
        for end in (e.end0, e.end1):
            if end not in seen_v:
                errors.append(f"edge {e.id!r}: dangling endpoint {end!r}")
        if not isinstance(e.length, Fraction):
            errors.append(f"edge {e.id!r}: length is not an exact rational")
        elif e.length <= 0:
            errors.append(f"edge {e.id!r}: nonpositive length {e.length}")
    if g.basepoint is not None and g.basepoint not in seen_v:
        errors.append(f"basepoint {g.basepoint!r} is not a vertex")
    return ValidationReport(connected=_is_connected(g), errors=tuple(errors))


def canonical_point(g: MetricGraph, eid: str, offset) -> PointRef:
    e = g.edge(eid)
    t = to_rational(offset)
    if t < 0 or t > e.length:
        raise GraphError(f"offset {t} outside [0, {e.length}] on edge {eid!r}")
    if t == 0:
        return Vertex(e.end0)
    if t == e.length:
        return Vertex(e.end1)
    return Interior(eid, t)


def incident_directions(g: MetricGraph, p: PointRef) -> list[Direction]:
    if not g.contains(p):
        raise GraphError(f"point {p} is not on the graph")
    if isinstance(p, Interior):
        return [Direction(p, p.edge, +1), Direction(p, p.edge, -1)]
    return [Direction(p, eid, sign) for eid, sign in g.incidence.get(p.id, ())]


def vertices_of(g: MetricGraph) -> list[Vertex]:
    return [Vertex(v) for v in g.vertices]
