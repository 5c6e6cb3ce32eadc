import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tropgraph.functions import EdgeProfile, TropFunction, constant  # noqa: E402
from tropgraph.graph import MetricGraph  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


def unit_edge(length=1):
    return MetricGraph.build(["u", "v"], [("e", "u", "v", length)])


def linear(g, slope, start=0, edge="e", name=""):
    e = g.edge(edge)
    return TropFunction.make(g, [EdgeProfile.affine(edge, e.length, slope, start)], name=name)


def poly(g, points, edge="e", name=""):
    return TropFunction.make(g, [EdgeProfile.from_points(edge, [(Fraction(x), Fraction(y)) for x, y in points])],
                             name=name)


@pytest.fixture
def unit():
    return unit_edge()


@pytest.fixture
def zero_x(unit):
    """The family {0, x} on the unit edge."""
    return [constant(unit, 0, "f1"), linear(unit, 1, name="f2")]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
