"""JSON documents for graphs, functions, divisors, semimodules, games, CSPs and results.

Every rational is written as a reduced ``"p/q"`` (or ``"n"``) string and
``"inf"`` stands for the tropical top element.  Writers produce plain
dicts with a fixed key order; :func:`dumps` serializes them byte-for-byte
deterministically.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from .exact import format_rational, is_inf, to_rational
from .functions import Divisor, EdgeProfile, TropFunction
from .games import GameCertificate, MinAction, StochGame
from .gadgets import CSPInstance
from .graph import Interior, MetricGraph, PointRef, Vertex, canonical_point
from .semimodule import EvalMatrix, Semimodule


class FormatError(ValueError):
    """A document does not follow the expected format; the message names the location."""


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None


def _q(x) -> str:
    return format_rational(x)


def _rat(x, where: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise FormatError(f"{where}: expected a rational string 'p/q', got {x!r}")
    try:
        return to_rational(x)
    except (ValueError, TypeError) as exc:
        raise FormatError(f"{where}: {exc}") from None


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"{where}: expected an integer, got {x!r}")
    return x


def _obj(x, where: str) -> Mapping:
    if not isinstance(x, Mapping):
        raise FormatError(f"{where}: expected an object")
    return x


def _list(x, where: str) -> list:
    if not isinstance(x, list):
        raise FormatError(f"{where}: expected an array")
    return x


def _key(doc: Mapping, key: str, where: str):
    if key not in doc:
        raise FormatError(f"{where}: missing key {key!r}")
    return doc[key]


# --------------------------------------------------------------------------
# graphs and points


def graph_to_doc(g: MetricGraph) -> dict:
    return {
        "vertices": list(g.vertices),
        "edges": [{"id": e.id, "ends": [e.end0, e.end1], "length": _q(e.length)} for e in g.edges],
        "basepoint": g.basepoint,
    }


def graph_from_doc(doc: Any, where: str = "graph") -> MetricGraph:
    from .graph import GraphError

    doc = _obj(doc, where)
    vertices = _list(_key(doc, "vertices", where), f"{where}.vertices")
    edges = []
    for k, e in enumerate(_list(_key(doc, "edges", where), f"{where}.edges")):
        loc = f"{where}.edges[{k}]"
        e = _obj(e, loc)
        ends = _list(_key(e, "ends", loc), f"{loc}.ends")
        if len(ends) != 2:
            raise FormatError(f"{loc}.ends: expected two vertex ids")
        edges.append((_key(e, "id", loc), ends[0], ends[1], _rat(_key(e, "length", loc), f"{loc}.length")))
    try:
        return MetricGraph.build(vertices, edges, doc.get("basepoint"))
    except GraphError as exc:
        raise FormatError(f"{where}: {exc}") from None


def point_to_str(p: PointRef) -> str:
    if isinstance(p, Vertex):
        return p.id
    return f"{p.edge}@{_q(p.offset)}"


def point_from_str(g: MetricGraph, text: str, where: str = "point") -> PointRef:
    if not isinstance(text, str):
        raise FormatError(f"{where}: expected a point reference string")
    if text in g.vertex_index:
        return Vertex(text)
    eid, sep, off = text.rpartition("@")
    if not sep or eid not in g.edge_map:
        raise FormatError(f"{where}: {text!r} is neither a vertex nor 'edge@offset'")
    t = _rat(off, where)
    if not 0 <= t <= g.edge(eid).length:
        raise FormatError(f"{where}: offset {off} is outside edge {eid!r}")
    return canonical_point(g, eid, t)


# --------------------------------------------------------------------------
# functions and divisors


def function_to_doc(f: TropFunction) -> dict:
    edges = {}
    for p in f.profiles:
        edges[p.edge] = {
            "breaks": [_q(t) for t in p.breaks],
            "slopes": list(p.slopes),
            "start_value": _q(p.start_value),
        }
    return {
        "name": f.name,
        "edges": edges,
        "isolated": {v: _q(x) for v, x in f.isolated},
    }


def function_from_doc(g: MetricGraph, doc: Any, where: str = "function") -> TropFunction:
    from .functions import FunctionError
    from .graph import GraphError

    doc = _obj(doc, where)
    profiles = []
    for eid, e in _obj(doc.get("edges", {}), f"{where}.edges").items():
        loc = f"{where}.edges[{eid!r}]"
        e = _obj(e, loc)
        breaks = [_rat(t, f"{loc}.breaks") for t in _list(_key(e, "breaks", loc), f"{loc}.breaks")]
        slopes = [_int(s, f"{loc}.slopes") for s in _list(_key(e, "slopes", loc), f"{loc}.slopes")]
        try:
            profiles.append(EdgeProfile(eid, tuple(breaks), tuple(slopes),
                                        _rat(_key(e, "start_value", loc), f"{loc}.start_value")))
        except FunctionError as exc:
            raise FormatError(f"{loc}: {exc}") from None
    isolated = {v: _rat(x, f"{where}.isolated[{v!r}]")
                for v, x in _obj(doc.get("isolated", {}), f"{where}.isolated").items()}
    try:
        return TropFunction.make(g, profiles, isolated, str(doc.get("name", "")))
    except (FunctionError, GraphError) as exc:
        raise FormatError(f"{where}: {exc}") from None


def divisor_to_doc(D: Divisor) -> dict:
    return {point_to_str(p): k for p, k in D.coefficients}


def divisor_from_doc(g: MetricGraph, doc: Any, where: str = "divisor") -> Divisor:
    doc = _obj(doc, where)
    out: dict[PointRef, int] = {}
    for text, k in doc.items():
        p = point_from_str(g, text, f"{where}[{text!r}]")
        out[p] = out.get(p, 0) + _int(k, f"{where}[{text!r}]")
    return Divisor.of(out)


# --------------------------------------------------------------------------
# semimodules


def semimodule_to_doc(M: Semimodule) -> dict:
    return {"graph": graph_to_doc(M.graph), "generators": [function_to_doc(f) for f in M.generators]}


def semimodule_from_doc(doc: Any, base: Path | None = None, where: str = "semimodule") -> Semimodule:
    from .functions import FunctionError

    doc = _obj(doc, where)
    g = graph_from_doc(_resolve(_key(doc, "graph", where), base, f"{where}.graph"), f"{where}.graph")
    gens = [function_from_doc(g, _resolve(f, base, f"{where}.generators[{k}]"), f"{where}.generators[{k}]")
            for k, f in enumerate(_list(_key(doc, "generators", where), f"{where}.generators"))]
    try:
        return Semimodule.of(gens)
    except FunctionError as exc:
        raise FormatError(f"{where}: {exc}") from None


def _resolve(x, base: Path | None, where: str):
    """An inline document, or a string naming a file relative to ``base``."""
    if isinstance(x, str):
        return load_json(Path(base or ".") / x)
    return x


def eval_matrix_to_doc(E: EvalMatrix) -> dict:
    return {"points": [point_to_str(p) for p in E.points],
            "rows": [[_q(x) for x in row] for row in E.rows]}


# --------------------------------------------------------------------------
# games and certificates


def game_to_doc(G: StochGame) -> dict:
    max_actions = {}
    for i in range(G.n):
        alphas = {}
        for a, betas in enumerate(G.max_actions(i)):
            alphas[_action_name(G, i, a)] = {
                f"b{b}": {"payoff": _q(act.payoff),
                          "transitions": [[G.state_name(j), _q(p)] for j, p in act.transitions]}
                for b, act in enumerate(betas)
            }
        max_actions[G.state_name(i)] = alphas
    return {"states": [G.state_name(i) for i in range(G.n)], "max_actions": max_actions}


def _action_name(G: StochGame, i: int, a: int) -> str:
    names = getattr(G, "action_names", None)
    if names and i < len(names) and names[i] and a < len(names[i]):
        return str(names[i][a])
    return f"a{a}"


def game_from_doc(doc: Any, where: str = "game") -> StochGame:
    from .games import GameError

    doc = _obj(doc, where)
    states = [str(s) for s in _list(_key(doc, "states", where), f"{where}.states")]
    if len(set(states)) != len(states):
        raise FormatError(f"{where}.states: duplicate state ids")
    index = {s: k for k, s in enumerate(states)}
    table = _obj(_key(doc, "max_actions", where), f"{where}.max_actions")
    actions, names = [], []
    for s in states:
        loc = f"{where}.max_actions[{s!r}]"
        alphas = _obj(_key(table, s, f"{where}.max_actions"), loc)
        per_state, per_names = [], []
        for aname, betas in alphas.items():
            aloc = f"{loc}[{aname!r}]"
            mins = []
            for bname, act in _obj(betas, aloc).items():
                bloc = f"{aloc}[{bname!r}]"
                act = _obj(act, bloc)
                trans = []
                for k, t in enumerate(_list(_key(act, "transitions", bloc), f"{bloc}.transitions")):
                    tl = f"{bloc}.transitions[{k}]"
                    t = _list(t, tl)
                    if len(t) != 2 or t[0] not in index:
                        raise FormatError(f"{tl}: expected [known state, probability]")
                    trans.append((index[t[0]], _rat(t[1], tl)))
                mins.append(MinAction(_rat(_key(act, "payoff", bloc), f"{bloc}.payoff"), tuple(trans)))
            per_state.append(tuple(mins))
            per_names.append(str(aname))
        actions.append(tuple(per_state))
        names.append(tuple(per_names))
    extra = set(table) - set(states)
    if extra:
        raise FormatError(f"{where}.max_actions: unknown states {sorted(extra)}")
    try:
        return StochGame(tuple(actions), tuple(states), tuple(names))
    except GameError as exc:
        raise FormatError(f"{where}: {exc}") from None


def certificate_to_doc(cert: GameCertificate) -> dict:
    doc: dict = {"kind": cert.kind, "c": [_q(x) for x in cert.c]}
    if cert.rho is not None:
        doc["rho"] = _q(cert.rho)
    return doc


def certificate_from_doc(doc: Any, where: str = "certificate") -> GameCertificate:
    from .games import GameError

    doc = _obj(doc, where)
    kind = _key(doc, "kind", where)
    c = tuple(_rat(x, f"{where}.c[{k}]") for k, x in enumerate(_list(_key(doc, "c", where), f"{where}.c")))
    rho = doc.get("rho")
    try:
        return GameCertificate(kind, c, None if rho is None else _rat(rho, f"{where}.rho"))
    except GameError as exc:
        raise FormatError(f"{where}: {exc}") from None


# --------------------------------------------------------------------------
# CSP instances


def csp_to_doc(csp: CSPInstance) -> dict:
    return {
        "n": csp.n,
        "avg": [list(t) for t in csp.avg],
        "min": [list(t) for t in csp.mins],
        "a": {f"{i},{j}": v for (i, j), v in csp.a},
    }


def csp_from_doc(doc: Any, where: str = "csp") -> CSPInstance:
    doc = _obj(doc, where)
    n = _int(_key(doc, "n", where), f"{where}.n")

    def triples(key):
        out = []
        for k, t in enumerate(_list(doc.get(key, []), f"{where}.{key}")):
            t = _list(t, f"{where}.{key}[{k}]")
            if len(t) != 3:
                raise FormatError(f"{where}.{key}[{k}]: expected three indices")
            out.append(tuple(_int(x, f"{where}.{key}[{k}]") for x in t))
        return out

    a = {}
    for key, v in _obj(_key(doc, "a", where), f"{where}.a").items():
        parts = key.split(",")
        try:
            i, j = (int(x) for x in parts)
        except ValueError:
            raise FormatError(f"{where}.a[{key!r}]: expected a key 'i,j'") from None
        a[(i, j)] = _int(v, f"{where}.a[{key!r}]")
    return CSPInstance.make(n, triples("avg"), triples("min"), a)


def matrix_from_doc(doc: Any, where: str = "matrix") -> list[list[int]]:
    if isinstance(doc, Mapping):
        doc = _key(doc, "matrix", where)
    rows = _list(doc, where)
    out = [[_int(x, f"{where}[{r}][{k}]") for k, x in enumerate(_list(row, f"{where}[{r}]"))]
           for r, row in enumerate(rows)]
    if not out or any(len(r) != len(out[0]) for r in out):
        raise FormatError(f"{where}: expected a non-empty rectangular integer matrix")
    return out


def rational_list(xs: Sequence) -> list[str]:
    return [_q(x) for x in xs]


def extended_str(x) -> str:
    return "inf" if is_inf(x) else _q(x)
