"""Exact scalars.

Rationals are :class:`fractions.Fraction`; the tropical top element is
``math.inf``, the only non-rational value that ever enters a computation.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

INF = math.inf

Q = Fraction
Scalar = Union[int, Fraction]
Extended = Union[int, Fraction, float]  # float only ever means INF

_RATIONAL_RE = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


def to_rational(x) -> Fraction:
    """Convert ``x`` to a :class:`Fraction`, rejecting floats and bools."""
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot convert {type(x).__name__} {x!r} to an exact rational")


def to_extended(x) -> Extended:
    """Like :func:`to_rational` but lets ``inf`` / ``"inf"`` through."""
    if isinstance(x, float) and math.isinf(x) and x > 0:
        return INF
    if isinstance(x, str) and x.strip() in ("inf", "+inf", "∞"):
        return INF
    return to_rational(x)


def parse_rational(text: str) -> Fraction:
    m = _RATIONAL_RE.match(text)
    if not m:
        raise ValueError(f"malformed rational {text!r}; expected 'p/q' or 'n'")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def format_rational(x) -> str:
    """Canonical text form: ``"n"`` or ``"p/q"`` reduced, ``"inf"`` for the top element."""
    if is_inf(x):
        return "inf"
    return str(Fraction(x))


def is_inf(x) -> bool:
    return isinstance(x, float) and x == INF


def tmin(*xs):
    """Tropical sum (min) over extended scalars; empty sum is INF."""
    return min(xs, default=INF)
