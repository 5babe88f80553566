"""Eigenvalues, spectral radius and the moment / operator-norm upper bounds."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import lapack

from .ensemble import as_array
from .errors import ConfigurationError, NumericalError, UnsupportedError

EIG_CAP = 4096


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    n: int
    scaled: bool = False

    @property
    def radius(self) -> float:
        return float(np.abs(self.eigenvalues).max()) if self.n else 0.0

    def sorted(self) -> np.ndarray:
        ev = self.eigenvalues
        return ev[np.lexsort((ev.imag, ev.real))]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re", "im"])
            for z in self.eigenvalues:
                w.writerow([repr(float(z.real)), repr(float(z.imag))])


@dataclass
class RadiusBounds:
    rho_exact: float | None
    trace_bound_k: dict[int, float] = field(default_factory=dict)
    power_bound_m: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        bounds = [{"kind": "trace_moment", "k_or_m": k, "value": v} for k, v in sorted(self.trace_bound_k.items())]
        bounds += [{"kind": "power_norm", "k_or_m": m, "value": v} for m, v in sorted(self.power_bound_m.items())]
        return {"rho": self.rho_exact, "bounds": bounds}

    def to_json(self, path=None) -> str:
        s = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(s + "\n")
        return s


def default_k(n: int) -> int:
    """k = ceil((ln n)^2), at least 2."""
    return max(2, math.ceil(math.log(n) ** 2)) if n > 1 else 2


def eigenvalues(X, cap: int = EIG_CAP) -> Spectrum:
    a = as_array(X)
    n = a.shape[0]
    if n > cap:
        raise UnsupportedError(f"n = {n} exceeds the dense eigensolver cap {cap}")
    if np.iscomplexobj(a) and not np.any(a.imag):
        a = a.real
    # geev: balancing, Hessenberg reduction, shifted QR
    if np.iscomplexobj(a):
        w, _, _, info = lapack.zgeev(np.asfortranarray(a, dtype=complex), compute_vl=0, compute_vr=0)
    else:
        wr, wi, _, _, info = lapack.dgeev(np.asfortranarray(a, dtype=float), compute_vl=0, compute_vr=0)
        w = wr + 1j * wi
    if info > 0:
        raise NumericalError(f"QR iteration failed to converge; {info} eigenvalues unresolved", info=info)
    if info < 0:  # pragma: no cover - argument error inside LAPACK
        raise NumericalError(f"geev argument {-info} invalid", info=info)
    return Spectrum(eigenvalues=np.asarray(w, dtype=complex), n=n)


def spectral_radius(X) -> float:
    return eigenvalues(X).radius


def esd(X) -> np.ndarray:
    spec = eigenvalues(X)
    return spec.eigenvalues / math.sqrt(spec.n)


def outlier_count(spectrum, radius: float) -> int:
    ev = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    return int(np.count_nonzero(np.abs(ev) > radius))


# trace-moment bound ------------------------------------------------------


def _renorm(M: np.ndarray, log_scale: float) -> tuple[np.ndarray, float]:
    m = float(np.abs(M).max())
    if m == 0.0 or not math.isfinite(m):
        if m == 0.0:
            return M, -math.inf
        raise NumericalError("non-finite entries in matrix power")
    return M / m, log_scale + math.log(m)


def log_matrix_power(X, p: int) -> tuple[np.ndarray, float]:
    """X^p as (M, s) with X^p = exp(s) * M and max|M| = 1.

    Binary exponentiation, renormalizing after every product.
    """
    if p < 0:
        raise ConfigurationError("power must be >= 0")
    a = as_array(X)
    if p == 0:
        return np.eye(a.shape[0], dtype=a.dtype), 0.0
    base, lb = _renorm(a.astype(complex if np.iscomplexobj(a) else float), 0.0)
    result, lr = None, 0.0
    while True:
        if lb == -math.inf:
            return np.zeros_like(base), -math.inf
        if p & 1:
            if result is None:
                result, lr = base.copy(), lb
            else:
                result, lr = _renorm(result @ base, lr + lb)
                if lr == -math.inf:
                    return result, lr
        p >>= 1
        if not p:
            return result, lr
        base, lb = _renorm(base @ base, 2 * lb)


def log_trace_moment(X, k: int) -> float:
    """ln Tr((X*)^{k-1} X^{k-1}), via the squared Frobenius norm of X^{k-1}."""
    if k < 2:
        raise ConfigurationError("k must be >= 2")
    M, s = log_matrix_power(X, k - 1)
    if s == -math.inf:
        return -math.inf
    fro = float(np.linalg.norm(M))
    return 2.0 * (s + math.log(fro))


def trace_moment_bound(X, k: int) -> float:
    """(Tr((X*)^{k-1} X^{k-1}))^{1/(2k-2)}, an upper bound on the spectral radius."""
    lt = log_trace_moment(X, k)
    if lt == -math.inf:
        return 0.0
    try:
        return math.exp(lt / (2 * k - 2))
    except OverflowError as exc:
        raise NumericalError(
            f"trace bound overflows double precision (log value {lt / (2 * k - 2):.6g}); "
            "use log_trace_moment for log-domain evaluation"
        ) from exc


# operator norm of X^m by power iteration ---------------------------------


@dataclass(frozen=True)
class NormBracket:
    """Rayleigh bracket for ||X^m||: lower <= ||X^m|| <= upper once converged."""

    lower: float
    upper: float
    iterations: int


def _safe_norm(v: np.ndarray) -> float:
    # scale by the largest entry so squares of tiny vectors do not underflow
    t = float(np.abs(v).max()) if v.size else 0.0
    if t == 0.0:
        return 0.0
    return t * float(np.linalg.norm(v / t))


def _apply_power(a: np.ndarray, m: int, v: np.ndarray) -> tuple[np.ndarray, float]:
    log_norm = 0.0
    for _ in range(m):
        v = a @ v
        s = _safe_norm(v)
        if s == 0.0:
            return v, -math.inf
        v = v / s
        log_norm += math.log(s)
    return v, log_norm


def operator_norm_power(
    X, m: int, tol: float = 1e-10, max_iter: int = 50_000, seed: int = 0, stall_rtol: float = 1e-12
) -> NormBracket:
    """Power iteration on (X^m)*(X^m), applying X one factor at a time.

    Stops when the Rayleigh residual falls below ``tol`` or when the Rayleigh
    quotient's relative change stays under ``stall_rtol`` for 3 consecutive
    iterations.
    """
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    a = as_array(X)
    ah = a.conj().T
    n = a.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    if np.iscomplexobj(a):
        v = v + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    prev = None
    calm = 0
    for it in range(1, max_iter + 1):
        y, log_av = _apply_power(a, m, v)  # A v = exp(log_av) y
        if log_av == -math.inf:
            # a random start lies in the kernel of a nonzero X^m with probability 0,
            # so check whether X^m vanishes before restarting
            if log_matrix_power(a, m)[1] == -math.inf:
                return NormBracket(0.0, 0.0, it)
            v = rng.standard_normal(n) + 0j if np.iscomplexobj(a) else rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        z, log_ahy = _apply_power(ah, m, y)  # A* A v = exp(log_av + log_ahy) z
        if log_ahy == -math.inf:  # pragma: no cover - impossible for y in range(A)
            raise NumericalError("degenerate power iteration", info=it)
        # residual of A*A v - theta v relative to theta = ||A v||^2
        rel_res = float(np.linalg.norm(math.exp(log_ahy - log_av) * z - v))
        log_sigma = log_av
        if prev is not None and abs(log_sigma - prev) < stall_rtol / 2:
            calm += 1
        else:
            calm = 0
        prev = log_sigma
        if rel_res < tol or calm >= 3:
            lo = math.exp(log_sigma)
            return NormBracket(lo, lo * math.sqrt(1.0 + rel_res), it)
        v = z
    raise NumericalError(f"power iteration stagnated after {max_iter} iterations", info=max_iter)


def power_norm_bound(X, m: int, **kw) -> float:
    """||X^m||^{1/m}, an upper bound on the spectral radius for every m >= 1."""
    br = operator_norm_power(X, m, **kw)
    return br.lower ** (1.0 / m)


def radius_bounds(X, ks=(2, 3, 4, 5, 6), ms=(1, 2, 4, 8), exact: bool = True) -> RadiusBounds:
    return RadiusBounds(
        rho_exact=spectral_radius(X) if exact else None,
        trace_bound_k={k: trace_moment_bound(X, k) for k in ks},
        power_bound_m={m: power_norm_bound(X, m) for m in ms},
    )


def markov_tail_bound(k: int, n: int, delta: float, moment: float | None = None, log_moment: float | None = None) -> float:
    """(1+delta)^{-2k+2} n^{-k+1} * moment, evaluated in the log domain.

    Pass ``log_moment`` instead of ``moment`` when the moment itself overflows.
    """
    if (moment is None) == (log_moment is None):
        raise ConfigurationError("give exactly one of moment, log_moment")
    if log_moment is None:
        if moment < 0:
            raise ConfigurationError("moment must be >= 0")
        if moment == 0:
            return 0.0
        log_moment = math.log(moment)
    lv = (-2 * k + 2) * math.log1p(delta) + (-k + 1) * math.log(n) + log_moment
    return math.exp(lv) if lv < 709.0 else math.inf
