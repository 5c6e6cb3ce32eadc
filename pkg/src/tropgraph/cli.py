"""Command-line front end.

Every command prints one JSON result document on stdout.  Exit codes:
0 when a verdict was reached, 2 when the answer is honestly unresolved
(bounds are reported) and 1 on malformed input.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from . import io as tio
from .exact import format_rational as q
from .functions import FunctionError, divisor_of, evaluate, in_riemann_roch
from .gadgets import (CSPInstance, GadgetError, complete_instance, csp_to_generalized,
                      matrix_gadget, validate_csp)
from .games import (GameError, OracleCapExceeded, brute_force_mean_payoff, decide_sign,
                    verify_certificate)
from .graph import GraphError
from .independence import IndependenceError, build_game, check_independence
from .rank import troprank

DEFAULT_MAX_ITERS = 10_000


@dataclass(frozen=True)
class CommandResult:
    code: int
    document: dict
    summary: str = ""


class InputError(Exception):
    pass


def default_max_iters() -> int:
    text = os.environ.get("TROPGRAPH_MAX_ITERS")
    if not text:
        return DEFAULT_MAX_ITERS
    try:
        value = int(text)
    except ValueError:
        raise InputError(f"TROPGRAPH_MAX_ITERS={text!r} is not an integer") from None
    if value < 1:
        raise InputError("TROPGRAPH_MAX_ITERS must be positive")
    return value


def _load(path: str):
    return tio.load_json(path)


def _bundle_parts(path: str):
    """A bundle inlines ``graph`` and ``functions`` (inline docs or file names)."""
    doc = _load(path)
    if not isinstance(doc, dict) or "graph" not in doc:
        raise InputError(f"{path}: a bundle needs a 'graph' entry")
    base = Path(path).parent
    g = tio.graph_from_doc(tio._resolve(doc["graph"], base, "graph"))
    fdocs = doc.get("functions", [])
    fs = [tio.function_from_doc(g, tio._resolve(f, base, f"functions[{k}]"), f"functions[{k}]")
          for k, f in enumerate(fdocs)]
    return doc, g, fs


def _graph_and_functions(args):
    if args.bundle:
        _, g, fs = _bundle_parts(args.bundle)
        return g, fs
    if not args.graph:
        raise InputError("give a graph file and function files, or --bundle")
    g = tio.graph_from_doc(_load(args.graph), args.graph)
    fs = [tio.function_from_doc(g, _load(p), p) for p in args.functions]
    return g, fs


# --------------------------------------------------------------------------
# commands


def cmd_indep(args) -> CommandResult:
    g, fs = _graph_and_functions(args)
    if len(fs) < 2:
        raise InputError("independence needs at least two functions")
    max_iters = args.max_iters or default_max_iters()
    v = check_independence(fs, max_iters)
    doc: dict[str, Any] = {"command": "indep", "verdict": v.kind}
    if v.kind == "unresolved":
        doc["rho_bounds"] = tio.rational_list(v.bounds)
        code = 2
    else:
        doc["rho_bounds"] = tio.rational_list(v.rho_bounds)
        doc["method"] = v.method
        if v.kind == "dependent":
            doc["coefficients"] = tio.rational_list(v.coefficients)
        if args.emit_cert:
            doc["certificate"] = tio.certificate_to_doc(v.certificate)
        if v.kind == "independent":
            if args.emit_points:
                doc["points"] = [tio.point_to_str(p) for p in v.points]
            if v.permutation is not None:
                doc["permutation"] = [k + 1 for k in v.permutation]
        code = 0
    if args.plot:
        from .plot import functions_svg
        Path(args.plot).write_text(functions_svg(fs), encoding="utf-8")
    return CommandResult(code, doc, f"verdict: {v.kind}")


def cmd_rank(args) -> CommandResult:
    M = tio.semimodule_from_doc(_load(args.semimodule), Path(args.semimodule).parent)
    r = troprank(M, budget=args.budget, max_iters=args.max_iters or default_max_iters())
    doc = {"command": "rank", "exact": r.exact, "lower": r.lo, "upper": r.hi,
           "evidence": list(r.evidence)}
    return CommandResult(0 if r.is_exact else 2, doc,
                         f"rank {r.exact}" if r.is_exact else f"rank in [{r.lo}, {r.hi}]")


def cmd_game(args) -> CommandResult:
    G = tio.game_from_doc(_load(args.game), args.game)
    if args.action == "solve":
        dec = decide_sign(G, args.max_iters or default_max_iters())
        doc: dict[str, Any] = {"command": "game solve", "outcome": dec.outcome,
                               "bounds": tio.rational_list(dec.bounds), "method": dec.method}
        if dec.certificate is not None:
            doc["certificate"] = tio.certificate_to_doc(dec.certificate)
        return CommandResult(0 if dec.resolved else 2, doc, f"outcome: {dec.outcome}")
    if args.action == "verify":
        if not args.cert:
            raise InputError("verify needs --cert")
        cert = tio.certificate_from_doc(_load(args.cert), args.cert)
        if len(cert.c) != G.n:
            raise InputError(f"{args.cert}: certificate has {len(cert.c)} entries, game has {G.n} states")
        ok = verify_certificate(G, cert)
        return CommandResult(0, {"command": "game verify", "kind": cert.kind, "valid": ok},
                             f"valid: {ok}")
    chi = brute_force_mean_payoff(G, cap=args.cap)
    doc = {"command": "game oracle",
           "mean_payoff": {G.state_name(i): q(x) for i, x in enumerate(chi)}}
    return CommandResult(0, doc, "")


def _write_instance(out_dir: Path, prefix: str, graph, functions) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    gpath = out_dir / f"{prefix}graph.json"
    gpath.write_text(tio.dumps(tio.graph_to_doc(graph)), encoding="utf-8")
    names = []
    for k, f in enumerate(functions):
        p = out_dir / f"{prefix}f{k + 1:03d}.json"
        p.write_text(tio.dumps(tio.function_to_doc(f)), encoding="utf-8")
        names.append(p.name)
    bundle = {"graph": gpath.name, "functions": names}
    (out_dir / f"{prefix}bundle.json").write_text(tio.dumps(bundle), encoding="utf-8")
    return {"graph": gpath.name, "functions": names, "bundle": f"{prefix}bundle.json"}


def _instance_doc(graph, functions) -> dict:
    return {"graph": tio.graph_to_doc(graph), "functions": [tio.function_to_doc(f) for f in functions]}


def cmd_gadget(args) -> CommandResult:
    doc: dict[str, Any] = {"command": f"gadget {args.kind}"}
    if args.kind == "csp":
        csp = tio.csp_from_doc(_load(args.input), args.input)
        report = validate_csp(csp)
        if not report.ok:
            raise InputError("; ".join(report.errors))
        gi = csp_to_generalized(csp)
        doc["M"] = gi.M
        doc["provenance"] = dict(gi.provenance)
        doc["function_names"] = [f.name for f in gi.functions]
        parts = [("", gi.graph, gi.functions)]
        if args.complete:
            ci = complete_instance(gi)
            doc["added_edges"] = list(ci.added_edges)
            parts.append(("completed-", ci.graph, ci.functions))
    else:
        A = tio.matrix_from_doc(_load(args.input), args.input)
        mg = matrix_gadget(A)
        doc["evaluation_matrix"] = tio.eval_matrix_to_doc(mg.B)
        parts = [("", mg.graph, mg.module.generators)]
    if args.out_dir:
        doc["files"] = {(prefix or "instance").rstrip("-"): _write_instance(Path(args.out_dir), prefix, g, fs)
                        for prefix, g, fs in parts}
    else:
        doc["instances"] = {(prefix or "instance").rstrip("-"): _instance_doc(g, fs)
                            for prefix, g, fs in parts}
    return CommandResult(0, doc, "")


def cmd_eval(args) -> CommandResult:
    g, fs = _graph_and_functions(args)
    if not fs:
        raise InputError("eval needs a function")
    pts = [tio.point_from_str(g, s, f"point {s!r}") for s in args.point]
    doc = {"command": "eval",
           "values": [{"function": f.name, "values": {tio.point_to_str(p): tio.extended_str(evaluate(f, p))
                                                       for p in pts}} for f in fs]}
    if args.plot:
        from .plot import functions_svg
        Path(args.plot).write_text(functions_svg(fs), encoding="utf-8")
    return CommandResult(0, doc, "")


def cmd_divisor(args) -> CommandResult:
    g, fs = _graph_and_functions(args)
    if len(fs) != 1:
        raise InputError("divisor needs exactly one function")
    f = fs[0]
    if not f.is_total:
        raise InputError("the divisor of a function is defined only when it is finite everywhere")
    D = divisor_of(f)
    doc: dict[str, Any] = {"command": "divisor", "divisor": tio.divisor_to_doc(D),
                           "degree": D.degree, "effective": D.is_effective}
    if args.rd:
        E = tio.divisor_from_doc(g, _load(args.rd), args.rd)
        doc["in_riemann_roch"] = in_riemann_roch(f, E)
    return CommandResult(0, doc, "")


def cmd_generate(args) -> CommandResult:
    from . import generators as gen

    rng = random.Random(args.seed)
    if args.kind == "family":
        fs = gen.independent_family(rng, args.size) if not args.dependent else gen.dependent_family(rng, args.size)
        doc = _instance_doc(fs[0].graph, fs)
    elif args.kind == "csp":
        csp, _ = gen.feasible_csp(rng, args.size)
        doc = tio.csp_to_doc(csp)
    else:
        doc = tio.game_to_doc(gen.random_game(rng, args.size))
    return CommandResult(0, doc, "")


# --------------------------------------------------------------------------
# parser


def _add_inputs(p: argparse.ArgumentParser):
    p.add_argument("graph", nargs="?", help="graph JSON file")
    p.add_argument("functions", nargs="*", help="function JSON files")
    p.add_argument("--bundle", help="bundle JSON inlining or naming the graph and functions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tropgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for generated data (default 0)")
    parser.add_argument("--summary", action="store_true", help="also print a one-line summary on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("indep", help="decide tropical independence of a family")
    _add_inputs(p)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--emit-cert", action="store_true")
    p.add_argument("--emit-points", action="store_true")
    p.add_argument("--plot", help="write an SVG sketch of the functions to this file")
    p.set_defaults(run=cmd_indep)

    p = sub.add_parser("rank", help="tropical rank of a semimodule")
    p.add_argument("semimodule")
    p.add_argument("--budget", type=int, default=3)
    p.add_argument("--max-iters", type=int, default=None)
    p.set_defaults(run=cmd_rank)

    p = sub.add_parser("game", help="solve, verify or brute-force a stochastic game")
    p.add_argument("action", choices=("solve", "verify", "oracle"))
    p.add_argument("game")
    p.add_argument("--cert", help="certificate JSON file (verify)")
    p.add_argument("--cap", type=int, default=10**6, help="strategy-pair cap for the oracle")
    p.add_argument("--max-iters", type=int, default=None)
    p.set_defaults(run=cmd_game)

    p = sub.add_parser("gadget", help="build a hardness gadget")
    p.add_argument("kind", choices=("csp", "matrix"))
    p.add_argument("input")
    p.add_argument("--complete", action="store_true", help="also build the connected completion")
    p.add_argument("--out-dir", help="write graph/function files here instead of inlining them")
    p.set_defaults(run=cmd_gadget)

    p = sub.add_parser("eval", help="evaluate functions at points")
    _add_inputs(p)
    p.add_argument("--point", action="append", default=[], help="vertex id or 'edge@offset'")
    p.add_argument("--plot", help="write an SVG sketch of the functions to this file")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("divisor", help="principal divisor of a function")
    _add_inputs(p)
    p.add_argument("--rd", help="divisor JSON file; check membership in its Riemann-Roch space")
    p.set_defaults(run=cmd_divisor)

    p = sub.add_parser("generate", help="random test data")
    p.add_argument("kind", choices=("family", "csp", "game"))
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--dependent", action="store_true", help="family: make it dependent")
    p.set_defaults(run=cmd_generate)
    return parser


INPUT_ERRORS = (InputError, tio.FormatError, GraphError, FunctionError, GameError, GadgetError,
                IndependenceError, OracleCapExceeded)


def run(argv: Sequence[str] | None = None) -> CommandResult:
    args = build_parser().parse_args(argv)
    return _run(args)


def _run(args) -> CommandResult:
    try:
        return args.run(args)
    except INPUT_ERRORS as exc:
        return CommandResult(1, {"command": args.command, "error": str(exc)}, f"error: {exc}")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    res = _run(args)
    sys.stdout.write(tio.dumps(res.document))
    if res.summary and (res.code == 1 or args.summary):
        print(res.summary, file=sys.stderr)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
