"""Tropical rank of matrices and of finitely generated semimodules."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import INF, is_inf, to_extended
from .graph import Interior, PointRef
from .independence import Independent, check_independence
from .semimodule import (Semimodule, evaluation_matrix, rank_lower_bound_slopes, refined_breaks,
                         refined_vertices, two_slope_points)


class RankBudgetExceeded(RuntimeError):
    pass


def _prepare(A: Sequence[Sequence]) -> list[list]:
    """Rows with at least one finite entry, one per class of rows equal up to a constant.

    Two rows that differ by a constant can never sit together in a
    nonsingular minor (exchanging them does not change any diagonal sum),
    and shifting a row preserves nonsingularity, so one representative
    per class suffices.
    """
    seen = set()
    out = []
    for row in A:
        row = [to_extended(x) for x in row]
        finite = [x for x in row if not is_inf(x)]
        if not finite:
            continue
        base = finite[0]
        key = tuple("inf" if is_inf(x) else x - base for x in row)
        if key not in seen:
            seen.add(key)
            out.append(row)
    return out


def _has_nonsingular_minor(rows: list[list], cols: Sequence[int], budget: list[int]) -> bool:
    """Is there a choice of rows making the square minor on ``cols`` nonsingular?

    Dynamic programming over the columns in order; a state is the set of
    rows used so far and keeps the minimal diagonal sum together with the
    number of ways (capped at 2) to reach it.
    """
    states: dict[int, tuple[Fraction, int]] = {0: (Fraction(0), 1)}
    R = len(rows)
    for j in cols:
        nxt: dict[int, tuple[Fraction, int]] = {}
        for mask, (val, cnt) in states.items():
            for k in range(R):
                if mask >> k & 1:
                    continue
                a = rows[k][j]
                if is_inf(a):
                    continue
                nm = mask | (1 << k)
                v = val + a
                old = nxt.get(nm)
                if old is None or v < old[0]:
                    nxt[nm] = (v, cnt)
                elif v == old[0]:
                    nxt[nm] = (v, min(2, old[1] + cnt))
        budget[0] -= len(nxt)
        if budget[0] < 0:
            raise RankBudgetExceeded("DSS rank search exceeded its budget")
        states = nxt
        if not states:
            return False
    return any(cnt == 1 for _, cnt in states.values())


def dss_matrix_rank(A: Sequence[Sequence], max_small_dim: int = 8, budget: int = 5_000_000) -> int:
    """Size of the largest tropically nonsingular square submatrix.

    A square matrix is nonsingular when ``min_sigma sum_k A[k, sigma(k)]``
    is finite and attained by exactly one permutation.
    """
    rows = [list(r) for r in A]
    if not rows or not rows[0]:
        return 0
    if len(rows[0]) > len(rows):
        rows = [list(col) for col in zip(*rows)]
    if len(rows[0]) > max_small_dim:
        raise RankBudgetExceeded(f"smaller dimension {len(rows[0])} exceeds {max_small_dim}")
    rows = _prepare(rows)
    if not rows:
        return 0
    C = len(rows[0])
    left = [budget]
    for r in range(min(C, len(rows)), 0, -1):
        for cols in itertools.combinations(range(C), r):
            if _has_nonsingular_minor(rows, cols, left):
                return r
    return 0


# --------------------------------------------------------------------------
# semimodules


@dataclass(frozen=True)
class RankResult:
    exact: int | None
    lo: int
    hi: int
    evidence: tuple[str, ...] = field(default=())

    @property
    def is_exact(self) -> bool:
        return self.exact is not None


def _dyadic_points(M: Semimodule, level: int) -> list[PointRef]:
    pts = list(refined_vertices(M))
    for eid, ts in refined_breaks(M).items():
        for a, b in zip(ts, ts[1:]):
            steps = 2 ** level
            for s in range(1, steps):
                pts.append(Interior(eid, a + (b - a) * s / steps))
    return pts


def troprank(M: Semimodule, budget: int = 3, max_iters: int = 2_000) -> RankResult:
    """Exact rank on the two-slope path, otherwise certified bounds with their sources.

    ``budget`` is the number of dyadic refinement levels tried for
    evaluation-matrix lower bounds.
    """
    m = len(M.generators)
    evidence: list[str] = []
    pts = two_slope_points(M)
    if pts is not None:
        r = dss_matrix_rank(evaluation_matrix(M, pts).rows)
        evidence.append(f"two-slope condition holds; evaluation at {len(pts)} refined vertices "
                        f"is injective and its matrix has tropical rank {r}")
        return RankResult(r, r, r, tuple(evidence))
    lo = rank_lower_bound_slopes(M)
    evidence.append(f"slope count: some direction carries {lo} distinct slopes, so rank >= {lo}")
    for level in range(0, budget + 1):
        pts = _dyadic_points(M, level)
        try:
            r = dss_matrix_rank(evaluation_matrix(M, pts).rows)
        except RankBudgetExceeded:
            evidence.append(f"level {level}: matrix rank search over budget, stopped refining")
            break
        evidence.append(f"level {level}: evaluation at {len(pts)} points has tropical rank {r}")
        if r > lo:
            lo = r
        if lo == m:
            break
    if lo < m:
        for size in range(m, lo, -1):
            found = False
            for sub in itertools.combinations(range(m), size):
                v = check_independence([M.generators[i] for i in sub], max_iters)
                if isinstance(v, Independent):
                    evidence.append(f"generators {[i + 1 for i in sub]} certified independent by the game")
                    lo = size
                    found = True
                    break
            if found:
                break
    if lo == m:
        evidence.append(f"lower bound meets the number of generators ({m})")
        return RankResult(m, m, m, tuple(evidence))
    evidence.append(f"upper bound: {m} generators")
    return RankResult(None, lo, m, tuple(evidence))
