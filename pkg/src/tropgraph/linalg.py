"""Small exact linear algebra over the rationals, plus a Markov chain evaluator."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class SingularSystem(ValueError):
    pass


def solve(A: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve ``A x = b`` exactly by Gauss-Jordan elimination.

    ``A`` may be rectangular or rank deficient as long as the system is
    consistent; free variables are set to 0.  Raises :class:`SingularSystem`
    on an inconsistent system.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    M = [[Fraction(x) for x in A[r]] + [Fraction(b[r])] for r in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        p = next((k for k in range(r, rows) if M[k][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        if piv != 1:
            M[r] = [x / piv for x in M[r]]
        row_r = M[r]
        for k in range(rows):
            if k != r and M[k][c] != 0:
                f = M[k][c]
                row_k = M[k]
                M[k] = [x - f * y for x, y in zip(row_k, row_r)]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for k in range(r, rows):
        if M[k][cols] != 0:
            raise SingularSystem("inconsistent linear system")
    x = [Fraction(0)] * cols
    for k, c in enumerate(pivots):
        x[c] = M[k][cols]
    return x


def strongly_connected_components(succ: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components come out in reverse topological order."""
    n = len(succ)
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            if k < len(succ[v]):
                work[-1] = (v, k + 1)
                w = succ[v][k]
                if index[w] is None:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(sorted(comp))
    return comps


def recurrent_classes(P: Sequence[dict[int, Fraction]]) -> list[list[int]]:
    succ = [sorted(k for k, p in row.items() if p) for row in P]
    comps = strongly_connected_components(succ)
    out = []
    for comp in comps:
        s = set(comp)
        if all(w in s for v in comp for w in succ[v]):
            out.append(comp)
    return sorted(out)


def chain_gain_bias(P: Sequence[dict[int, Fraction]], r: Sequence[Fraction]):
    """Gain ``g = P* r`` and bias ``h`` with ``g + h = r + P h`` and ``P* h = 0``.

    ``P`` is a row-stochastic matrix given as one sparse row (state -> prob)
    per state.
    """
    n = len(P)
    g = [Fraction(0)] * n
    h = [Fraction(0)] * n
    classes = recurrent_classes(P)
    in_class = set()
    for C in classes:
        pos = {s: k for k, s in enumerate(C)}
        m = len(C)
        # stationary distribution: pi (P_C - I) = 0, sum pi = 1
        A = [[(P[C[col]].get(C[row], 0)) - (1 if row == col else 0) for col in range(m)]
             for row in range(m)]
        A.append([1] * m)
        pi = solve(A, [0] * m + [1])
        gain = sum(pi[k] * r[s] for k, s in enumerate(C))
        # bias on the class: (I - P_C) h = r - gain, pi . h = 0
        B = [[(1 if a == b else 0) - P[C[a]].get(C[b], 0) for b in range(m)] for a in range(m)]
        B.append(list(pi))
        hc = solve(B, [r[s] - gain for s in C] + [0])
        for s in C:
            g[s] = gain
            h[s] = hc[pos[s]]
            in_class.add(s)
    trans = [s for s in range(n) if s not in in_class]
    if trans:
        pos = {s: k for k, s in enumerate(trans)}
        m = len(trans)
        I_minus = [[(1 if a == b else 0) - P[trans[a]].get(trans[b], 0) for b in range(m)]
                   for a in range(m)]
        rhs = [sum(p * g[w] for w, p in P[s].items() if w in in_class) for s in trans]
        gt = solve(I_minus, rhs)
        for s in trans:
            g[s] = gt[pos[s]]
        rhs = [r[s] - g[s] + sum(p * h[w] for w, p in P[s].items() if w in in_class)
               for s in trans]
        ht = solve(I_minus, rhs)
        for s in trans:
            h[s] = ht[pos[s]]
    return g, h
