"""Independent reference implementations used to freeze golden values.

Nothing here shares code with the package: brute force over all sequences,
and the BEST theorem for Eulerian circuits.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction


def brute_even_closed_paths(N: int, k: int) -> list[tuple[int, ...]]:
    """All closed paths of length 2k on {1..N} whose directed edges each occur an even number of times."""
    out = []
    for body in itertools.product(range(1, N + 1), repeat=2 * k):
        P = body + (body[0],)
        c = Counter(zip(P, P[1:]))
        if all(v % 2 == 0 for v in c.values()):
            out.append(P)
    return out


def brute_tally(N: int, k: int) -> dict[int, int]:
    return dict(sorted(Counter(len(set(P)) for P in brute_even_closed_paths(N, k)).items()))


def brute_labeled_rooted(N: int, k: int) -> dict[int, int]:
    """|G_N(k, l)| by l: distinct edge multisets of even paths, times their distinct edges (root choices)."""
    graphs = {frozenset(Counter(zip(P, P[1:])).items()) for P in brute_even_closed_paths(N, k)}
    tally: Counter = Counter()
    for g in graphs:
        verts = {v for (e, _) in g for v in e}
        tally[len(verts)] += len(g)
    return dict(sorted(tally.items()))


def _det(M: list[list[Fraction]]) -> Fraction:
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if M[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            M[i], M[piv] = M[piv], M[i]
            det = -det
        det *= M[i][i]
        for r in range(i + 1, n):
            f = M[r][i] / M[i][i]
            for c in range(i, n):
                M[r][c] -= f * M[i][c]
    return det


def best_generating_paths(mult: dict[tuple[int, int], int]) -> int:
    """Number of closed vertex sequences generating the Eulerian multi digraph ``mult``.

    BEST: ec = t_w * prod_v (deg(v) - 1)! counts Eulerian circuits with labeled
    parallel edges. Each circuit gives deg(s) sequences starting at s, and each
    vertex sequence is counted prod_e n_e! times over edge labelings.
    """
    verts = sorted({v for e in mult for v in e})
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    out_deg = Counter()
    for (u, _), c in mult.items():
        out_deg[u] += c
    L = [[Fraction(0)] * n for _ in range(n)]
    for (u, v), c in mult.items():
        if u != v:
            L[idx[u]][idx[u]] += c
            L[idx[u]][idx[v]] -= c
    t = _det([row[1:] for row in L[1:]]) if n > 1 else Fraction(1)
    ec = t * math.prod(math.factorial(out_deg[v] - 1) for v in verts)
    total = ec * sum(mult.values())
    denom = math.prod(math.factorial(c) for c in mult.values())
    assert total % denom == 0
    return int(total / denom)


def brute_generating_paths(mult: dict[tuple[int, int], int]) -> int:
    """Direct count over all vertex sequences (small graphs only)."""
    verts = sorted({v for e in mult for v in e})
    m = sum(mult.values())
    target = Counter(mult)
    count = 0
    for body in itertools.product(verts, repeat=m):
        P = body + (body[0],)
        if Counter(zip(P, P[1:])) == target:
            count += 1
    return count
