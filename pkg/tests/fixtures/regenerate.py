"""Rebuild the fixture inputs in this directory.

Run ``python3 tests/fixtures/regenerate.py``; golden outputs are rebuilt
with ``--golden`` after the inputs.
"""

import sys
from fractions import Fraction as F
from pathlib import Path

from tropgraph import io as tio
from tropgraph.cli import run
from tropgraph.functions import Divisor, EdgeProfile, TropFunction, constant, trop_min
from tropgraph.gadgets import CSPInstance
from tropgraph.games import GameCertificate, StochGame
from tropgraph.graph import MetricGraph, Vertex

HERE = Path(__file__).parent


def write(name, doc):
    (HERE / name).write_text(tio.dumps(doc), encoding="utf-8")


def line(g, slope, start=0, name=""):
    return TropFunction.make(g, [EdgeProfile.affine("e", 1, slope, start)], name=name)


def inputs():
    g = MetricGraph.build(["u", "v"], [("e", "u", "v", 1)])
    write("unit_graph.json", tio.graph_to_doc(g))
    zero, x = constant(g, 0, name="zero"), line(g, 1, name="x")
    write("zero.json", tio.function_to_doc(zero))
    write("x.json", tio.function_to_doc(x))
    dep = trop_min(zero, line(g, 1, F(-1, 2)))
    write("min_zero_x_shifted.json", tio.function_to_doc(TropFunction.make(g, dep.profiles, name="m")))
    tent = TropFunction.make(g, [EdgeProfile.from_points("e", [(0, 0), (F(1, 2), F(1, 2)), (1, 0)])], name="tent")
    write("tent.json", tio.function_to_doc(tent))
    write("divisor_u.json", tio.divisor_to_doc(Divisor.of({Vertex("u"): 1})))
    write("bundle_zero_x.json", {"graph": "unit_graph.json", "functions": ["zero.json", "x.json"]})
    write("module_zero_x.json", {"graph": "unit_graph.json", "generators": ["zero.json", "x.json"]})
    write("module_zero.json", {"graph": "unit_graph.json", "generators": ["zero.json"]})
    write("module_three_slopes.json", {"graph": tio.graph_to_doc(g), "generators": [
        tio.function_to_doc(f) for f in (zero, x, line(g, 2, name="2x"))]})
    write("game_loop3.json", tio.game_to_doc(StochGame.build([[[(3, [(0, 1)])]]])))
    write("game_zero_x.json", tio.game_to_doc(StochGame.build([[[(1, [(1, 1)])]], [[(0, [(0, 1)])]]])))
    write("eigenpair_zero_x.json", tio.certificate_to_doc(GameCertificate("eigenpair", (F(1, 2), F(0)), F(1, 2))))
    big = [[[(0, [(0, 1)]), (0, [(1, 1)]), (1, [(2, 1)])] for _ in range(3)] for _ in range(8)]
    for state in big:
        for acts in state:
            acts[:] = [(p, [(j % 8, w)]) for p, [(j, w)] in acts]
    write("game_large.json", tio.game_to_doc(StochGame.build(big)))
    write("matrix_2x2.json", {"matrix": [[0, 1], [1, 0]]})
    a = {(2, 1): 1, (3, 1): 1, (1, 2): -1, (1, 3): -1, (2, 3): -10, (3, 2): -10}
    write("csp_infeasible.json", tio.csp_to_doc(CSPInstance.make(3, [(1, 2, 3)], [], a)))
    write("csp_trivial.json", tio.csp_to_doc(CSPInstance.make(2, a={(1, 2): 1, (2, 1): 1})))


GOLDEN = {
    "indep_zero_x": ["indep", "--bundle", "bundle_zero_x.json", "--emit-cert", "--emit-points"],
    "indep_dependent": ["indep", "unit_graph.json", "zero.json", "x.json", "min_zero_x_shifted.json"],
    "rank_zero_x": ["rank", "module_zero_x.json"],
    "game_solve_loop3": ["game", "solve", "game_loop3.json"],
    "game_verify_zero_x": ["game", "verify", "game_zero_x.json", "--cert", "eigenpair_zero_x.json"],
    "gadget_matrix_2x2": ["gadget", "matrix", "matrix_2x2.json"],
    "divisor_x": ["divisor", "unit_graph.json", "x.json", "--rd", "divisor_u.json"],
    "eval_tent": ["eval", "unit_graph.json", "tent.json", "--point", "u", "--point", "e@1/2"],
}


def golden():
    import os
    os.chdir(HERE)
    for name, argv in GOLDEN.items():
        res = run(argv)
        (HERE / f"golden_{name}.json").write_text(tio.dumps(res.document), encoding="utf-8")


if __name__ == "__main__":
    if "--golden" in sys.argv:
        golden()
    else:
        inputs()
