"""Paths, multi digraphs, even digraphs and their counting.

Vertices are arbitrary hashable, orderable labels (the experiments use
1..N). A loop (v, v) counts once in the out-degree and once in the
in-degree of v.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .errors import BudgetError, CapacityError, ConfigurationError, UnsupportedError

Edge = tuple[int, int]
Path = tuple[int, ...]

ENUM_GUARD = 10**8
CANON_VERTEX_CAP = 12


@dataclass(frozen=True)
class MultiDigraph:
    vertices: tuple[int, ...]
    edges: tuple[tuple[Edge, int], ...]  # sorted ((u, v), multiplicity)

    def __post_init__(self):
        vs = set(self.vertices)
        for (u, v), n in self.edges:
            if n < 1:
                raise ConfigurationError(f"edge {(u, v)} has multiplicity {n}")
            if u not in vs or v not in vs:
                raise ConfigurationError(f"edge {(u, v)} leaves the vertex set")

    @classmethod
    def from_edges(cls, edges: Mapping[Edge, int] | Iterable[Edge], vertices: Iterable[int] | None = None) -> MultiDigraph:
        """Build from a multiplicity mapping or an iterable of (possibly repeated) edges."""
        mult = Counter(edges) if not isinstance(edges, Mapping) else Counter(dict(edges))
        mult = {e: n for e, n in mult.items() if n}
        if vertices is None:
            vertices = {x for e in mult for x in e}
        return cls(tuple(sorted(set(vertices))), tuple(sorted(mult.items())))

    @cached_property
    def mult(self) -> dict[Edge, int]:
        return dict(self.edges)

    @property
    def num_edges(self) -> int:
        """|E| with multiplicities."""
        return sum(n for _, n in self.edges)

    def out_degree(self, v) -> int:
        return sum(n for (a, _), n in self.edges if a == v)

    def in_degree(self, v) -> int:
        return sum(n for (_, b), n in self.edges if b == v)

    def successors(self, v) -> list:
        return sorted(b for (a, b) in self.mult if a == v)

    def doubled(self, times: int = 2) -> MultiDigraph:
        return MultiDigraph(self.vertices, tuple((e, n * times) for e, n in self.edges))

    def relabel(self, f: Mapping) -> MultiDigraph:
        return MultiDigraph.from_edges({(f[u], f[v]): n for (u, v), n in self.edges}, vertices=[f[x] for x in self.vertices])

    def __add__(self, other: MultiDigraph) -> MultiDigraph:
        m = Counter(self.mult)
        m.update(other.mult)
        return MultiDigraph.from_edges(m, vertices=set(self.vertices) | set(other.vertices))


@dataclass(frozen=True)
class RootedMultiDigraph:
    base: MultiDigraph
    root: Edge

    def __post_init__(self):
        if self.root not in self.base.mult:
            raise ConfigurationError(f"root {self.root} is not an edge")

    @property
    def vertices(self):
        return self.base.vertices

    @property
    def edges(self):
        return self.base.edges

    @property
    def num_edges(self) -> int:
        return self.base.num_edges

    def relabel(self, f: Mapping) -> RootedMultiDigraph:
        return RootedMultiDigraph(self.base.relabel(f), (f[self.root[0]], f[self.root[1]]))


def _base(G) -> MultiDigraph:
    return G.base if isinstance(G, RootedMultiDigraph) else G


# paths --------------------------------------------------------------------


def is_closed(P: Path) -> bool:
    return len(P) >= 1 and P[0] == P[-1]


def path_edges(P: Path) -> list[Edge]:
    return list(zip(P[:-1], P[1:]))


def digraph_of_path(P: Path) -> MultiDigraph:
    if not P:
        raise ConfigurationError("a path needs at least one vertex")
    return MultiDigraph.from_edges(path_edges(P), vertices=P)


def is_even_path(P: Path) -> bool:
    return is_closed(P) and all(n % 2 == 0 for n in Counter(path_edges(P)).values())


# structure ----------------------------------------------------------------


def is_strongly_connected(G) -> bool:
    G = _base(G)
    if not G.vertices:
        return False
    fwd, bwd = defaultdict(set), defaultdict(set)
    for u, v in G.mult:
        fwd[u].add(v)
        bwd[v].add(u)
    start = G.vertices[0]
    for adj in (fwd, bwd):
        seen, stack = {start}, [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(G.vertices):
            return False
    return True


def degree_condition(G) -> bool:
    """deg+(v) == deg-(v) and even at every vertex (multiplicities ignored otherwise)."""
    G = _base(G)
    out, inn = Counter(), Counter()
    for (u, v), n in G.edges:
        out[u] += n
        inn[v] += n
    return all(out[v] == inn[v] and out[v] % 2 == 0 for v in G.vertices)


def is_even_digraph(G) -> bool:
    """Generated by some even path.

    Strong connectivity plus the balanced-even degree test is not enough on its
    own: every multiplicity must also be even (a bidirected triangle with
    single edges passes the degree test but no even path generates it).
    """
    G = _base(G)
    return (
        bool(G.edges)
        and all(n % 2 == 0 for _, n in G.edges)
        and is_strongly_connected(G)
        and degree_condition(G)
    )


def _balanced(mult: Mapping[Edge, int]) -> bool:
    bal = Counter()
    for (u, v), n in mult.items():
        bal[u] += n
        bal[v] -= n
    return not any(bal.values())


def double_cycle_decomposition(G, root: Edge | None = None) -> list[tuple] | None:
    """Cycles C_1..C_q whose doublings partition the edge multiset of G.

    Each cycle is a vertex tuple (v1, ..., vm) for v1 -> v2 -> ... -> vm -> v1.
    C_1 contains the root edge (or the smallest vertex when unrooted) and every
    later cycle shares a vertex with the union of the earlier ones. Returns
    None when G is not an even digraph.
    """
    if isinstance(G, RootedMultiDigraph):
        root = G.root if root is None else root
        G = G.base
    if not is_even_digraph(G):
        return None
    half = {e: n // 2 for e, n in G.edges}
    if not _balanced(half):  # pragma: no cover - implied by the degree test on even multiplicities
        return None
    remaining = dict(half)

    def out_of(v):
        return sorted(b for (a, b), n in remaining.items() if a == v and n > 0)

    cycles: list[tuple] = []
    covered: set = set()
    while any(remaining.values()):
        cands = [v for v in sorted(covered) if out_of(v)] if covered else []
        start = cands[0] if cands else min(a for (a, _), n in remaining.items() if n > 0)
        # walk, peeling a cycle whenever the walk revisits a vertex
        stack = [start]
        pos = {start: 0}
        while stack:
            v = stack[-1]
            nxt = out_of(v)
            if not nxt:
                break  # only reachable once the closed trail has been consumed
            w = nxt[0]
            remaining[(v, w)] -= 1
            if w in pos:
                i = pos[w]
                cyc = tuple(stack[i:])
                for x in cyc[1:]:
                    del pos[x]
                del stack[i + 1:]
                cycles.append(cyc)
                covered.update(cyc)
            else:
                pos[w] = len(stack)
                stack.append(w)
    return _order_cycles(cycles, root)


def cycle_edges(c: tuple) -> list[Edge]:
    return [(c[i], c[(i + 1) % len(c)]) for i in range(len(c))]


def _order_cycles(cycles: list[tuple], root: Edge | None) -> list[tuple]:
    pool = list(cycles)
    if root is not None:
        first = next(i for i, c in enumerate(pool) if root in cycle_edges(c))
    else:
        lo = min(min(c) for c in pool)
        first = next(i for i, c in enumerate(pool) if lo in c)
    ordered = [pool.pop(first)]
    seen = set(ordered[0])
    while pool:
        i = next(i for i, c in enumerate(pool) if seen.intersection(c))
        c = pool.pop(i)
        ordered.append(c)
        seen.update(c)
    return ordered


def double_cycle(c: tuple) -> MultiDigraph:
    return MultiDigraph.from_edges(Counter(cycle_edges(c) * 2))


# generating paths ---------------------------------------------------------


def count_generating_paths(G, budget: int = 10**7) -> int:
    """Number of vertex sequences P with G_P == G (exact, memoized DFS).

    ``budget`` caps the number of distinct search states visited.
    """
    G = _base(G)
    edges = [e for e, _ in G.edges]
    index = {e: i for i, e in enumerate(edges)}
    out = defaultdict(list)
    for (u, v) in edges:
        out[u].append(v)
    memo: dict = {}
    visited = 0

    def dfs(v, counts: tuple) -> int:
        nonlocal visited
        if not any(counts):
            return 1
        key = (v, counts)
        if key in memo:
            return memo[key]
        visited += 1
        if visited > budget:
            raise BudgetError(f"generating-path search exceeded {budget} states", partial=sum(memo.values()))
        total = 0
        for w in out[v]:
            i = index[(v, w)]
            if counts[i]:
                c = list(counts)
                c[i] -= 1
                total += dfs(w, tuple(c))
        memo[key] = total
        return total

    init = tuple(n for _, n in G.edges)
    if not edges:
        return len(G.vertices)  # single-vertex paths
    return sum(dfs(v, init) for v in G.vertices)


def has_generating_even_path(G) -> bool:
    """Search for an even path P with G_P == G (independent of the degree test)."""
    G = _base(G)
    if not G.edges or any(n % 2 for _, n in G.edges):
        return False
    out = defaultdict(list)
    for (u, v), _ in G.edges:
        out[u].append(v)
    counts = dict(G.mult)
    total = G.num_edges
    start = G.vertices[0]
    if start not in out:
        return False

    def dfs(v, left) -> bool:
        if left == 0:
            return v == start
        for w in out[v]:
            if counts[(v, w)]:
                counts[(v, w)] -= 1
                ok = dfs(w, left - 1)
                counts[(v, w)] += 1
                if ok:
                    return True
        return False

    # a generating path covering a vertex set can start at any of its vertices
    return set(G.vertices) == {x for e in G.mult for x in e} and dfs(start, total)


# enumeration --------------------------------------------------------------


def _guard(N: int, k: int, guard: int) -> None:
    if N < 1 or k < 1:
        raise ConfigurationError("need N >= 1 and k >= 1")
    if N ** (2 * k) > guard:
        raise CapacityError(f"N^(2k) = {N}^{2 * k} exceeds the enumeration guard {guard}")


def enumerate_even_closed_paths(N: int, k: int, guard: int = ENUM_GUARD) -> Iterator[Path]:
    """All even closed paths of length 2k on [N] = {1..N}, each exactly once.

    Depth-first over prefixes, pruning a prefix once the number of
    odd-multiplicity edges exceeds the remaining steps.
    """
    _guard(N, k, guard)
    L = 2 * k
    verts = range(1, N + 1)
    counts: Counter = Counter()
    path = [0] * (L + 1)

    def rec(pos: int, odd: int):
        left = L - pos
        if left == 0:
            if odd == 0 and path[L] == path[0]:
                yield tuple(path)
            return
        u = path[pos]
        for w in verts if left > 1 else (path[0],):
            e = (u, w)
            c = counts[e]
            nodd = odd - 1 if c % 2 else odd + 1
            if nodd > left - 1:
                continue
            counts[e] = c + 1
            path[pos + 1] = w
            yield from rec(pos + 1, nodd)
            counts[e] = c

    for s in verts:
        path[0] = s
        yield from rec(0, 0)


def even_closed_path_tally(N: int, k: int, guard: int = ENUM_GUARD) -> dict[int, int]:
    """N(k, l): number of even closed paths of length 2k with l distinct vertices."""
    tally: Counter = Counter()
    for P in enumerate_even_closed_paths(N, k, guard):
        tally[len(set(P))] += 1
    return dict(sorted(tally.items()))


def even_digraphs(N: int, k: int, guard: int = ENUM_GUARD) -> set[MultiDigraph]:
    """All (unrooted) even digraphs on subsets of [N] with 2k edges."""
    return {digraph_of_path(P) for P in enumerate_even_closed_paths(N, k, guard)}


def rootings(G: MultiDigraph) -> list[RootedMultiDigraph]:
    return [RootedMultiDigraph(G, e) for e, _ in G.edges]


def enumerate_even_digraphs(N: int, k: int, l: int, guard: int = ENUM_GUARD) -> set[RootedMultiDigraph]:
    """G_N(k, l): labeled rooted even digraphs with l vertices in [N] and 2k edges."""
    if l > min(k, N) or l < 1:
        return set()
    return {R for G in even_digraphs(N, k, guard) if len(G.vertices) == l for R in rootings(G)}


def lemma_path_bound(k: int, l: int) -> int:
    """l * (4k - 4l)!; needs k >= l."""
    if k < l:
        raise ConfigurationError("bound needs k >= l")
    return l * math.factorial(4 * k - 4 * l)


def lemma_graph_bound(N: int, k: int, l: int) -> int:
    return N**l * k ** (2 * (k - l) + 1)


def path_count_bound(N: int, k: int, l: int) -> int:
    return k**2 * (4 * k) ** (6 * (k - l)) * N**l


@dataclass(frozen=True)
class CensusRow:
    k: int
    l: int
    N: int
    labeled_count: int
    class_count: int
    bound: int
    bound_ok: bool


def even_digraph_census(N: int, k: int, guard: int = ENUM_GUARD) -> list[CensusRow]:
    graphs = even_digraphs(N, k, guard)
    rows = []
    for l in range(1, min(k, N) + 1):
        rooted = [R for G in graphs if len(G.vertices) == l for R in rootings(G)]
        classes = {canonical_key(R) for R in rooted}
        bound = lemma_graph_bound(N, k, l)
        rows.append(CensusRow(k, l, N, len(rooted), len(classes), bound, len(rooted) <= bound))
    return rows


def all_strongly_connected_multidigraphs(max_vertices: int, max_edges: int) -> Iterator[MultiDigraph]:
    """Every strongly connected multi digraph on {1..v}, v <= max_vertices, with 1..max_edges edges."""
    for v in range(1, max_vertices + 1):
        slots = [(a, b) for a in range(1, v + 1) for b in range(1, v + 1)]
        for total in range(1, max_edges + 1):
            for combo in itertools.combinations_with_replacement(range(len(slots)), total):
                mult = Counter(slots[i] for i in combo)
                # every vertex needs an out-edge and an in-edge
                if len({a for a, _ in mult}) != v or len({b for _, b in mult}) != v:
                    continue
                G = MultiDigraph.from_edges(mult, vertices=range(1, v + 1))
                if is_strongly_connected(G):
                    yield G


# isomorphism --------------------------------------------------------------


def canonical_key(G) -> bytes:
    """Minimal serialized form over all vertex relabelings onto 0..l-1."""
    rooted = isinstance(G, RootedMultiDigraph)
    base = _base(G)
    verts = base.vertices
    if len(verts) > CANON_VERTEX_CAP:
        raise UnsupportedError(f"canonical_key is brute force; {len(verts)} > {CANON_VERTEX_CAP} vertices")
    best = None
    for perm in itertools.permutations(range(len(verts))):
        f = dict(zip(verts, perm))
        form = tuple(sorted((f[u], f[v], n) for (u, v), n in base.edges))
        if rooted:
            form = ((f[G.root[0]], f[G.root[1]]),) + form
        if best is None or form < best:
            best = form
    tag = b"R" if rooted else b"U"
    return tag + repr((len(verts), best)).encode()


def are_isomorphic(G1, G2) -> bool:
    """Direct search for a bijection preserving edges, multiplicities and root."""
    if isinstance(G1, RootedMultiDigraph) != isinstance(G2, RootedMultiDigraph):
        return False
    b1, b2 = _base(G1), _base(G2)
    if len(b1.vertices) != len(b2.vertices) or sorted(n for _, n in b1.edges) != sorted(n for _, n in b2.edges):
        return False
    for img in itertools.permutations(b2.vertices):
        f = dict(zip(b1.vertices, img))
        if isinstance(G1, RootedMultiDigraph) and (f[G1.root[0]], f[G1.root[1]]) != G2.root:
            continue
        if all(b2.mult.get((f[u], f[v])) == n for (u, v), n in b1.edges):
            return True
    return False
