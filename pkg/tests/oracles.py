"""Reference implementations used only by the tests.

Each oracle reaches its answer by a route that does not share code with
the library function it checks.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from tropgraph.exact import INF, is_inf


def sup_min_envelope(terms, u, v):
    """Max over [u, v] of the lower envelope of lines, by scanning every candidate abscissa.

    A concave piecewise-linear function reaches its maximum at an endpoint
    or at a kink, and every kink of a lower envelope is a crossing of two
    of its lines.
    """
    u, v = Fraction(u), Fraction(v)
    xs = {u, v}
    for (g1, d1), (g2, d2) in itertools.combinations(terms, 2):
        if g1 != g2:
            x = Fraction(d2 - d1) / (g1 - g2)
            if u <= x <= v:
                xs.add(x)
    return max(min(g * x + d for g, d in terms) for x in xs)


def tropical_det_count(M):
    """(minimum, number of minimizing permutations) over all permutations."""
    n = len(M)
    best, count = INF, 0
    for perm in itertools.permutations(range(n)):
        s = Fraction(0)
        for r, c in enumerate(perm):
            if is_inf(M[r][c]):
                s = INF
                break
            s += M[r][c]
        if is_inf(s):
            continue
        if is_inf(best) or s < best:
            best, count = s, 1
        elif s == best:
            count += 1
    return best, count


def dss_rank_bruteforce(A):
    """Largest r with an r x r minor whose tropical determinant is finite and attained once."""
    m, n = len(A), len(A[0])
    for r in range(min(m, n), 0, -1):
        for rows in itertools.combinations(range(m), r):
            for cols in itertools.combinations(range(n), r):
                sub = [[A[i][j] for j in cols] for i in rows]
                best, count = tropical_det_count(sub)
                if not is_inf(best) and count == 1:
                    return r
    return 0


def sample_offsets(length, k):
    """``k`` rational offsets spread through ``[0, length]`` (both ends included)."""
    length = Fraction(length)
    return [length * Fraction(i, k - 1) for i in range(k)]


def profile_value(points, t):
    """Value at ``t`` of the polyline through ``points`` (sorted by abscissa)."""
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if x0 <= t <= x1:
            return y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    raise ValueError("t outside the polyline")


def attained_twice_everywhere(fs, cs):
    """Independent check that min_j (f_j + c_j) is attained twice at every point.

    On each edge the candidate points are the breaks of all profiles and all
    pairwise crossings of their pieces; between consecutive candidates the
    order of the shifted functions is fixed, so testing the midpoints and
    the vertices covers every point.
    """
    g = fs[0].graph
    live = [(f, c) for f, c in zip(fs, cs) if not is_inf(c)]

    def twice(vals):
        m = min(vals, default=INF)
        return is_inf(m) or sum(1 for x in vals if x == m) >= 2

    for e in g.edges:
        ps = [(f.profile(e.id), c) for f, c in live if e.id in f.edge_profiles]
        cand = {t for p, _ in ps for t in p.breaks}
        for (p, c), (q, d) in itertools.combinations(ps, 2):
            for k in range(len(p.slopes)):
                for l in range(len(q.slopes)):
                    if p.slopes[k] == q.slopes[l]:
                        continue
                    # p + c and q + d as lines through their piece starts
                    ep = p.values[k] + c - p.slopes[k] * p.breaks[k]
                    eq = q.values[l] + d - q.slopes[l] * q.breaks[l]
                    t = Fraction(eq - ep) / (p.slopes[k] - q.slopes[l])
                    if 0 < t < e.length:
                        cand.add(t)
        ts = sorted(cand)
        for a, b in zip(ts, ts[1:]):
            mid = (a + b) / 2
            if not twice([p.value_at(mid) + c for p, c in ps]):
                return False
    for v in g.vertices:
        if not twice([f.vertex_values[v] + c for f, c in live if v in f.vertex_values]):
            return False
    return True
