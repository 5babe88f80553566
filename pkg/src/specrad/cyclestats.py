"""Weights of paths and even digraphs, dyadic class statistics, event A_k.

Matrix indices follow the vertex labels 1..N: vertex i addresses row i-1.

A class of labeled (rooted) digraphs isomorphic to a pattern is traversed
through injective vertex maps. Each member arises from exactly |Aut| maps, so
averages over maps are averages over the class; that is what makes the
Monte Carlo estimator (uniform random injective maps) unbiased.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .digraph import (
    MultiDigraph,
    Path,
    RootedMultiDigraph,
    canonical_key,
    cycle_edges,
    double_cycle,
    double_cycle_decomposition,
    path_edges,
)
from .ensemble import MatrixSample, as_array, event_B_holds
from .errors import CapacityError, ConfigurationError

EXACT_CAP = 10**7
AUTO_EXACT_LIMIT = 200_000
DEFAULT_MC_TRIALS = 20_000
_CHUNK = 1 << 16


@dataclass(frozen=True)
class WeightContext:
    matrix: object  # MatrixSample or square array
    eps: float
    B: float
    k: int
    seed: int = 0  # Monte Carlo stream; defaults to the matrix seed when built via for_matrix

    def __post_init__(self):
        if not self.eps > 0 or not self.B > 0:
            raise ConfigurationError("eps and B must be > 0")
        if self.k < 1:
            raise ConfigurationError("k must be >= 1")

    @classmethod
    def for_matrix(cls, X, eps: float, B: float, k: int) -> WeightContext:
        seed = X.seed if isinstance(X, MatrixSample) else 0
        return cls(X, eps, B, k, seed)

    @property
    def abs_matrix(self) -> np.ndarray:
        return np.abs(as_array(self.matrix))

    @property
    def N(self) -> int:
        return as_array(self.matrix).shape[0]

    @property
    def H(self) -> int:
        return h_cutoff(self.k, self.N)


def h_cutoff(k: int, N: int) -> int:
    """floor(4k log2 N)."""
    return math.floor(4 * k * math.log2(N)) if N > 1 else 0


# weights ------------------------------------------------------------------


def path_weight(X, P: Path) -> complex:
    a = as_array(X)
    w = 1.0 + 0j
    for i, j in path_edges(P):
        w *= a[i - 1, j - 1]
    return w


def digraph_weight(X, G) -> float:
    """p(G): product over distinct edges of |X_ij|^{n_ij}."""
    a = np.abs(as_array(X))
    base = G.base if isinstance(G, RootedMultiDigraph) else G
    return math.prod(float(a[u - 1, v - 1]) ** n for (u, v), n in base.edges)


def rooted_weight(X, G: RootedMultiDigraph) -> float:
    """p_r(G): the root edge's exponent is reduced by 2 (so X_root = 0 is harmless)."""
    if G.base.mult[G.root] < 2:
        raise ConfigurationError("rooted weight needs root multiplicity >= 2")
    a = np.abs(as_array(X))
    out = 1.0
    for (u, v), n in G.base.edges:
        e = n - 2 if (u, v) == G.root else n
        out *= float(a[u - 1, v - 1]) ** e
    return out


# dyadic levels ------------------------------------------------------------


def dyadic_levels(w: np.ndarray, H: int) -> np.ndarray:
    """Largest h in [0, H] with w >= 2^h, or -1 when w < 1 (exact, via frexp)."""
    w = np.asarray(w, dtype=float)
    _, e = np.frexp(w)
    lvl = e.astype(np.int64) - 1
    lvl = np.where(w < 1.0, -1, lvl)
    lvl = np.where(np.isinf(w), H, lvl)
    return np.minimum(lvl, H)


def dyadic_sum(a: float, H: int) -> float:
    """sum_{h=0}^{H} 2^h 1{a >= 2^h}."""
    lvl = int(dyadic_levels(np.array([a]), H)[0])
    return float(2 ** (lvl + 1) - 1) if lvl >= 0 else 0.0


def dyadic_sandwich_check(a: float, H: int = 64) -> tuple[float, float]:
    """Bounds (1/2 D, 1 + 2 D) on a, with D the truncated dyadic sum."""
    if a < 0:
        raise ConfigurationError("a must be >= 0")
    d = dyadic_sum(a, H)
    lower, upper = 0.5 * d, 1.0 + 2.0 * d
    if a <= 2.0**H:
        assert lower <= a <= upper, (a, lower, upper)
    return lower, upper


class _LevelHistogram:
    """Accumulates counts of dyadic levels; sample means are kept for stderr."""

    def __init__(self, H: int):
        self.H = H
        self.hist = np.zeros(H + 2, dtype=np.int64)  # index lvl+1
        self.count = 0
        self.sq = np.zeros(H + 1)  # sum of squared per-sample tail fractions (MC)

    def add(self, lvl: np.ndarray, group: int = 1):
        """``lvl`` has shape (samples, group): each sample contributes ``group`` members."""
        lvl = lvl.reshape(-1, group)
        self.hist += np.bincount(lvl.ravel() + 1, minlength=self.H + 2)
        self.count += lvl.size
        if group == 1:
            t = np.bincount(lvl.ravel() + 1, minlength=self.H + 2)[1:]
            tails = np.cumsum(t[::-1])[::-1]
            self.sq += tails  # indicator squared equals indicator
        else:
            top = int(lvl.max()) + 2
            if top <= 1:
                return
            per_row = np.zeros((lvl.shape[0], top), dtype=np.int64)
            np.add.at(per_row, (np.arange(lvl.shape[0])[:, None], lvl + 1), 1)
            frac = np.cumsum(per_row[:, ::-1], axis=1)[:, ::-1][:, 1:] / group
            self.sq[: top - 1] += (frac**2).sum(axis=0)

    def tail_fractions(self) -> np.ndarray:
        tail = np.cumsum(self.hist[::-1])[::-1][1:]  # count with lvl >= h
        return tail / self.count

    def stderr(self, samples: int) -> np.ndarray:
        p = self.tail_fractions()
        var = np.maximum(self.sq / samples - p**2, 0.0)
        return np.sqrt(var / max(samples - 1, 1))


@dataclass
class StatisticsRecord:
    class_key: bytes
    S_h: np.ndarray
    h_cutoff: int
    exact: bool
    class_size: int
    samples: int | None = None
    stderr: np.ndarray | None = None

    @property
    def S(self) -> float:
        return max(1.0, float(self.S_h.max()) if len(self.S_h) else 0.0)

    def dyadic_total(self, weight_exponent: float = 0.0) -> float:
        """sum_h 2^{h * weight_exponent} S_h."""
        h = np.arange(len(self.S_h))
        return float(np.sum(2.0 ** (h * weight_exponent) * self.S_h))

    def to_dict(self) -> dict:
        return {
            "class_key": self.class_key.hex(),
            "S_h": [float(x) for x in self.S_h],
            "S": self.S,
            "h_cutoff": self.h_cutoff,
            "exact": self.exact,
            "class_size": self.class_size,
            "samples": self.samples,
            "stderr": None if self.stderr is None else [float(x) for x in self.stderr],
        }


def _record(key: bytes, hist: _LevelHistogram, exact: bool, size: int, samples: int | None) -> StatisticsRecord:
    H = hist.H
    S_h = (2.0 ** np.arange(H + 1)) * hist.tail_fractions()
    se = None if exact else (2.0 ** np.arange(H + 1)) * hist.stderr(samples)
    return StatisticsRecord(key, S_h, H, exact, size, samples, se)


# cycle classes ------------------------------------------------------------


def cycle_class_size(N: int, m: int) -> int:
    """binom(N, m) (m-1)!: labeled double cycles with 2m edges on [N]."""
    if m > N:
        return 0
    return math.comb(N, m) * math.factorial(m - 1)


def _exact_cycles(N: int, m: int) -> Iterator[np.ndarray]:
    """Chunks of cycles (rows of 0-based vertices), each labeled cycle once."""
    perms = np.array([(0,) + t for t in itertools.permutations(range(1, m))], dtype=np.int64)
    combos = itertools.combinations(range(N), m)
    while True:
        block = np.array(list(itertools.islice(combos, max(1, _CHUNK // len(perms)))), dtype=np.int64)
        if not len(block):
            return
        yield block[:, perms].reshape(-1, m)


def _random_injections(rng: np.random.Generator, N: int, l: int, count: int) -> Iterator[np.ndarray]:
    done = 0
    while done < count:
        b = min(max(1, (1 << 20) // N), count - done)
        keys = rng.random((b, N))
        yield np.argpartition(keys, l - 1, axis=1)[:, :l] if l < N else np.argsort(keys, axis=1)
        done += b


def _edge_factors(absX: np.ndarray, cyc: np.ndarray) -> np.ndarray:
    """|X_e| for each of the m edges of each cycle row."""
    return absX[cyc, np.roll(cyc, -1, axis=1)]


def _rooted_products(F2: np.ndarray) -> np.ndarray:
    """For each row, the product of all entries except position j, for every j."""
    m = F2.shape[1]
    pre = np.ones_like(F2)
    suf = np.ones_like(F2)
    for j in range(1, m):
        pre[:, j] = pre[:, j - 1] * F2[:, j - 1]
        suf[:, m - 1 - j] = suf[:, m - j] * F2[:, m - j]
    return pre * suf


def _cycle_batches(ctx: WeightContext, m: int, mode: str, trials: int, seed: int | None):
    """Yield (F, exact) where F holds the edge moduli of a batch of cycles."""
    N = ctx.N
    if not 1 <= m <= N:
        raise ConfigurationError(f"cycle length m = {m} must lie in [1, N = {N}]")
    size = cycle_class_size(N, m)
    exact = _resolve_mode(mode, size)
    absX = ctx.abs_matrix
    if exact:
        for cyc in _exact_cycles(N, m):
            yield _edge_factors(absX, cyc)
    else:
        rng = np.random.default_rng([ctx.seed if seed is None else seed, m])
        for cyc in _random_injections(rng, N, m, trials):
            yield _edge_factors(absX, cyc)


def _resolve_mode(mode: str, size: int) -> bool:
    if mode == "exact":
        if size > EXACT_CAP:
            raise CapacityError(f"class of size {size} exceeds exact cap {EXACT_CAP}; use montecarlo")
        return True
    if mode == "montecarlo":
        return False
    if mode == "auto":
        return size <= AUTO_EXACT_LIMIT
    raise ConfigurationError(f"unknown mode {mode!r}")


@functools.lru_cache(maxsize=None)
def _cycle_key(m: int, rooted: bool) -> bytes:
    C = double_cycle(tuple(range(1, m + 1)))
    return canonical_key(RootedMultiDigraph(C, (1, 2 if m > 1 else 1)) if rooted else C)


def cycle_statistics_pair(
    ctx: WeightContext, m: int, mode: str = "auto", trials: int = DEFAULT_MC_TRIALS, seed: int | None = None
) -> tuple[StatisticsRecord, StatisticsRecord]:
    """Statistics of the double cycle class C_m and its rooted version, from one pass."""
    H = ctx.H
    plain, rooted = _LevelHistogram(H), _LevelHistogram(H)
    exact = _resolve_mode(mode, cycle_class_size(ctx.N, m))
    n = 0
    for F in _cycle_batches(ctx, m, mode, trials, seed):
        F2 = F * F
        p = np.prod(F2, axis=1)
        plain.add(dyadic_levels(p, H))
        rooted.add(dyadic_levels(_rooted_products(F2), H), group=m)
        n += len(F)
    size = cycle_class_size(ctx.N, m)
    samples = None if exact else n
    return (
        _record(_cycle_key(m, False), plain, exact, size, samples),
        _record(_cycle_key(m, True), rooted, exact, size * m, samples),
    )


def cycle_class_statistics(
    ctx: WeightContext, m: int, rooted: bool = False, mode: str = "auto",
    trials: int = DEFAULT_MC_TRIALS, seed: int | None = None,
) -> StatisticsRecord:
    plain, rt = cycle_statistics_pair(ctx, m, mode, trials, seed)
    return rt if rooted else plain


def cycle_empirical_moment(
    ctx: WeightContext, m: int, t: float, mode: str = "auto", trials: int = DEFAULT_MC_TRIALS, seed: int | None = None
) -> float:
    """Mean of |w(C)|^{2t} over the m-cycles of [N]."""
    total, n = 0.0, 0
    for F in _cycle_batches(ctx, m, mode, trials, seed):
        total += float(np.sum(np.prod(F, axis=1) ** (2 * t)))
        n += len(F)
    return total / n


def w_max_bound_check(ctx: WeightContext, m: int) -> tuple[float, float, bool]:
    """w_max(m) = max |w(C)| against (sum_C |w(C)|^{2+eps})^{1/(1+eps/2)}.

    The sum runs over the binom(N, m)(m-1)! cycles of the class.
    """
    eps = ctx.eps
    wmax = 0.0
    logs = []
    for F in _cycle_batches(ctx, m, "exact", 0, None):
        w = np.prod(F, axis=1)
        wmax = max(wmax, float(w.max()))
        nz = w[w > 0]
        if len(nz):
            lw = (2 + eps) * np.log(nz)
            mx = float(lw.max())
            logs.append(mx + math.log(float(np.sum(np.exp(lw - mx)))))
    if not logs:
        return wmax, 0.0, wmax**2 <= 0.0
    mx = max(logs)
    log_sum = mx + math.log(sum(math.exp(x - mx) for x in logs))
    rhs = math.exp(log_sum / (1 + eps / 2))
    return wmax, rhs, wmax**2 <= rhs * (1 + 1e-12)


# event A_k and E_k ----------------------------------------------------------


@dataclass
class EventAkReport:
    k: int
    sum_plain: list[float] = field(default_factory=list)  # sum_h S_h(C_m), m = 1..k
    sum_rooted: list[float] = field(default_factory=list)  # sum_h S_h(C*_m)
    sum_moment: list[float] = field(default_factory=list)  # sum_h 2^{h eps/2} S_h(C_m)
    A1: bool = True
    A2: bool = True
    A3: bool = True
    exact: bool = True

    @property
    def A_k(self) -> bool:
        return self.A1 and self.A2 and self.A3

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "per_m": [
                {"m": m + 1, "sum_plain": a, "sum_rooted": b, "sum_moment": c}
                for m, (a, b, c) in enumerate(zip(self.sum_plain, self.sum_rooted, self.sum_moment))
            ],
            "A1": self.A1, "A2": self.A2, "A3": self.A3, "A_k": self.A_k, "exact": self.exact,
        }


def check_event_Ak(ctx: WeightContext, mode: str = "auto", trials: int = DEFAULT_MC_TRIALS) -> EventAkReport:
    """Evaluate the three cycle-statistics inequalities for m = 1..min(k, N)."""
    k, B = ctx.k, ctx.B
    rep = EventAkReport(k=k)
    for m in range(1, min(k, ctx.N) + 1):
        plain, rooted = cycle_statistics_pair(ctx, m, mode, trials)
        s1 = plain.dyadic_total()
        s2 = rooted.dyadic_total()
        s3 = plain.dyadic_total(ctx.eps / 2)
        rep.sum_plain.append(s1)
        rep.sum_rooted.append(s2)
        rep.sum_moment.append(s3)
        rep.A1 &= s1 <= k**2
        rep.A2 &= s2 <= k**2
        rep.A3 &= s3 <= k**2 * B**m
        rep.exact &= plain.exact
    return rep


@dataclass
class EventEkReport:
    k: int
    second: list[float]  # nu_m[|w|^2]
    moment: list[float]  # nu_m[|w|^{2+eps}]
    holds: bool


def check_event_Ek(ctx: WeightContext, mode: str = "auto", trials: int = DEFAULT_MC_TRIALS) -> EventEkReport:
    """The cycle-average inequalities nu_m[|w|^2] <= k^2, nu_m[|w|^{2+eps}] <= k^2 B^m."""
    k, B = ctx.k, ctx.B
    second, mom, ok = [], [], True
    for m in range(1, min(k, ctx.N) + 1):
        a = cycle_empirical_moment(ctx, m, 1.0, mode, trials)
        b = cycle_empirical_moment(ctx, m, 1.0 + ctx.eps / 2, mode, trials)
        second.append(a)
        mom.append(b)
        ok &= a <= k**2 and b <= k**2 * B**m
    return EventEkReport(k, second, mom, ok)


@dataclass(frozen=True)
class MomentGrowthRow:
    m: int
    t: float
    value: float  # nu_m[|w|^{2t}]
    rhs: float  # N^{m t (1 - eps/8)}
    ok: bool


def cycle_moment_growth_check(
    ctx: WeightContext, ts=(1.0, 2.0, 3.0), mode: str = "auto", trials: int = DEFAULT_MC_TRIALS
) -> list[MomentGrowthRow]:
    """Compare nu_m[|w|^{2t}] with N^{m t (1 - eps/8)} for m = 1..min(k, N).

    The comparison is only expected to hold on A_k and B for large N; callers
    record failures rather than assume the inequality.
    """
    N, eps = ctx.N, ctx.eps
    rows = []
    for m in range(1, min(ctx.k, N) + 1):
        for t in ts:
            v = cycle_empirical_moment(ctx, m, t, mode, trials)
            rhs = float(N) ** (m * t * (1 - eps / 8))
            rows.append(MomentGrowthRow(m, t, v, rhs, v <= rhs))
    return rows


# general classes and the main estimate ------------------------------------------


def _pattern(G: RootedMultiDigraph):
    verts = G.base.vertices
    idx = {v: i for i, v in enumerate(verts)}
    us = np.array([idx[u] for (u, _), _ in G.base.edges], dtype=np.int64)
    vs = np.array([idx[v] for (_, v), _ in G.base.edges], dtype=np.int64)
    ex = np.array([n - 2 if e == G.root else n for e, n in G.base.edges], dtype=float)
    return len(verts), us, vs, ex


def class_statistics(
    ctx: WeightContext, G: RootedMultiDigraph, mode: str = "auto",
    trials: int = DEFAULT_MC_TRIALS, seed: int | None = None, k: int | None = None,
) -> StatisticsRecord:
    """S_h of the class of G with rooted weights p_r, H taken from k = |E|/2 unless given."""
    N = ctx.N
    l, us, vs, ex = _pattern(G)
    if l > N:
        raise ConfigurationError("pattern has more vertices than N")
    k = G.num_edges // 2 if k is None else k
    H = h_cutoff(k, N)
    maps = math.perm(N, l)
    exact = _resolve_mode(mode, maps)
    absX = ctx.abs_matrix
    hist = _LevelHistogram(H)
    if exact:
        batches = _exact_injections(N, l)
    else:
        rng = np.random.default_rng([ctx.seed if seed is None else seed, l, len(us)])
        batches = _random_injections(rng, N, l, trials)
    n = 0
    for img in batches:
        w = np.prod(absX[img[:, us], img[:, vs]] ** ex, axis=1)
        hist.add(dyadic_levels(w, H))
        n += len(img)
    aut = _automorphisms(G)
    return _record(canonical_key(G), hist, exact, maps // aut, None if exact else n)


def _exact_injections(N: int, l: int) -> Iterator[np.ndarray]:
    it = itertools.permutations(range(N), l)
    while True:
        block = np.array(list(itertools.islice(it, _CHUNK)), dtype=np.int64).reshape(-1, l)
        if not len(block):
            return
        yield block


def _automorphisms(G: RootedMultiDigraph) -> int:
    verts = G.base.vertices
    count = 0
    for img in itertools.permutations(verts):
        f = dict(zip(verts, img))
        if (f[G.root[0]], f[G.root[1]]) == G.root and G.base.relabel(f) == G.base:
            count += 1
    return count


def main_estimate_bound(N: int, k: int, x: int, eps: float, B: float) -> float:
    """N^{k-x} N^{-eps y/16} k^2 (3 e k^2)^{4k log B/(eps log N)}, y = max(0, k - x - 4k log B/(eps log N))."""
    lnN = math.log(N)
    r = 4 * k * math.log(B) / (eps * lnN)
    y = max(0.0, k - x - r)
    lv = (k - x) * lnN - eps * y / 16 * lnN + 2 * math.log(k) + r * math.log(3 * math.e * k**2)
    return math.exp(lv) if lv < 709 else math.inf


@dataclass(frozen=True)
class BoundCheck:
    S: float
    bound: float
    ok: bool
    hypothesis_met: bool  # N^{eps/16} >= 5 e k^2
    event_ak: bool
    event_b: bool
    exact: bool

    @property
    def asserted(self) -> bool:
        """Whether the comparison is a theorem instance rather than informational."""
        return self.hypothesis_met and self.event_ak and self.event_b


def statistics_bound_check(ctx: WeightContext, G: RootedMultiDigraph, mode: str = "exact") -> BoundCheck:
    if G.num_edges % 2:
        raise ConfigurationError("even digraph expected")
    k = G.num_edges // 2
    N = ctx.N
    kctx = replace(ctx, k=max(k, 1))
    ak = check_event_Ak(kctx).A_k
    rec = class_statistics(ctx, G, mode=mode)
    bound = main_estimate_bound(N, k, len(G.vertices), ctx.eps, ctx.B)
    hyp = N ** (ctx.eps / 16) >= 5 * math.e * k**2
    return BoundCheck(rec.S, bound, rec.S <= bound, hyp, ak, event_B_holds(ctx.matrix), rec.exact)


@dataclass(frozen=True)
class InductionStep:
    i: int
    m: int
    r: int
    S_prev: float
    S_new: float
    bound_general: float  # 3 e k^2 N^r S(U_{i-1})
    bound_light: float | None  # 5 e k^2 N^{r(1-eps/8)} S(U_{i-1}) when m log B <= eps/4 r log N
    ok: bool


def induction_chain_check(ctx: WeightContext, G: RootedMultiDigraph, mode: str = "exact") -> list[InductionStep]:
    """Grow G one double cycle at a time along its decomposition and compare S(U_i)."""
    cycles = double_cycle_decomposition(G)
    if cycles is None:
        raise ConfigurationError("not an even digraph")
    k = G.num_edges // 2
    N = ctx.N
    U = double_cycle(cycles[0])
    S_prev = class_statistics(ctx, RootedMultiDigraph(U, G.root), mode=mode, k=k).S
    steps = []
    for i, c in enumerate(cycles[1:], start=2):
        r = len(set(U.vertices) & set(c))
        m = len(c)
        U = U + double_cycle(c)
        S_new = class_statistics(ctx, RootedMultiDigraph(U, G.root), mode=mode, k=k).S
        general = 3 * math.e * k**2 * N**r * S_prev
        light = None
        if m * math.log(ctx.B) <= ctx.eps / 4 * r * math.log(N):
            light = 5 * math.e * k**2 * N ** (r * (1 - ctx.eps / 8)) * S_prev
        ok = S_new <= general and (light is None or S_new <= light)
        steps.append(InductionStep(i, m, r, S_prev, S_new, general, light, ok))
        S_prev = S_new
    return steps
