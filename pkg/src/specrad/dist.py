"""Symmetric entry distributions with analytic moments.

Every law is sampled as ``scale * sign * magnitude`` where ``sign`` is an
independent uniform +-1 factor, so all kinds are symmetric by construction.

Draw order for ``sample_array`` (part of the reproducibility contract):

1. the magnitude block, ``size`` values in C (row-major) order; complex
   Gaussians draw a real block then an imaginary block; kinds with a
   deterministic magnitude (rademacher, zero) draw nothing here;
2. the sign block, ``size`` uniforms, negative where ``u < 0.5``
   (zero draws nothing).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import ConfigurationError, UnsupportedError

KINDS = ("pareto", "sparse_toy", "rademacher", "gaussian", "complex_gaussian", "tabulated", "zero")

PROB_TOL = 1e-12


@dataclass(frozen=True)
class EntryDistribution:
    kind: str
    alpha: float | None = None
    q: float | None = None
    eps: float | None = None
    # (magnitude, probability) pairs, sorted by magnitude
    values: tuple[tuple[float, float], ...] | None = None
    scale: float = 1.0
    _cum: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)
    _mags: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown distribution kind {self.kind!r}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ConfigurationError(f"scale must be positive and finite, got {self.scale}")
        if self.kind == "pareto":
            if self.alpha is None or not self.alpha > 0:
                raise ConfigurationError("pareto requires alpha > 0")
        elif self.kind == "sparse_toy":
            if self.q is None or not (0 < self.q <= 1):
                raise ConfigurationError("sparse_toy requires q in (0, 1]")
            if self.eps is None or not (0 < self.eps < 1):
                raise ConfigurationError("sparse_toy requires eps in (0, 1)")
        elif self.kind == "tabulated":
            if not self.values:
                raise ConfigurationError("tabulated requires a nonempty value table")
            vals = tuple(sorted((float(m), float(p)) for m, p in self.values))
            if any(m < 0 or p < 0 for m, p in vals):
                raise ConfigurationError("tabulated magnitudes and probabilities must be >= 0")
            total = math.fsum(p for _, p in vals)
            if abs(total - 1.0) > PROB_TOL:
                raise ConfigurationError(f"tabulated probabilities sum to {total!r}, not 1")
            object.__setattr__(self, "values", vals)
            live = [(m, p) for m, p in vals if p > 0]
            object.__setattr__(self, "_mags", np.array([m for m, _ in live]))
            object.__setattr__(self, "_cum", np.cumsum([p for _, p in live]))

    # constructors -------------------------------------------------------

    @classmethod
    def pareto(cls, alpha: float) -> EntryDistribution:
        return cls("pareto", alpha=float(alpha))

    @classmethod
    def sparse_toy(cls, q: float, eps: float) -> EntryDistribution:
        return cls("sparse_toy", q=float(q), eps=float(eps))

    @classmethod
    def rademacher(cls) -> EntryDistribution:
        return cls("rademacher")

    @classmethod
    def gaussian(cls) -> EntryDistribution:
        return cls("gaussian")

    @classmethod
    def complex_gaussian(cls) -> EntryDistribution:
        return cls("complex_gaussian")

    @classmethod
    def tabulated(cls, values) -> EntryDistribution:
        return cls("tabulated", values=tuple((float(m), float(p)) for m, p in values))

    @classmethod
    def zero(cls) -> EntryDistribution:
        return cls("zero")

    def scaled(self, c: float) -> EntryDistribution:
        return replace(self, scale=self.scale * c)

    @property
    def is_complex(self) -> bool:
        return self.kind == "complex_gaussian"

    @property
    def has_atom_at_zero(self) -> bool:
        if self.kind == "sparse_toy":
            return self.q < 1
        if self.kind == "tabulated":
            return any(m == 0 and p > 0 for m, p in self.values)
        return self.kind == "zero"

    @property
    def tail_index(self) -> float:
        """Supremum of the orders p with finite E|x|^p."""
        return self.alpha if self.kind == "pareto" else math.inf

    # serialization ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind}
        if self.kind == "pareto":
            d["alpha"] = self.alpha
        elif self.kind == "sparse_toy":
            d["q"] = self.q
            d["eps"] = self.eps
        elif self.kind == "tabulated":
            d["values"] = [[m, p] for m, p in self.values]
        if self.scale != 1.0:
            d["scale"] = self.scale
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> EntryDistribution:
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigurationError(f"distribution descriptor needs a 'kind': {d!r}")
        allowed = {
            "pareto": {"alpha"},
            "sparse_toy": {"q", "eps"},
            "tabulated": {"values"},
        }.get(d["kind"], set()) | {"kind", "scale"}
        extra = set(d) - allowed
        if extra:
            raise ConfigurationError(f"unexpected keys for {d['kind']!r}: {sorted(extra)}")
        kw = {k: v for k, v in d.items() if k != "kind"}
        if "values" in kw:
            kw["values"] = tuple((float(m), float(p)) for m, p in kw["values"])
        return cls(d["kind"], **kw)

    @classmethod
    def from_json(cls, s: str) -> EntryDistribution:
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class MomentReport:
    p: float
    value: float
    method: str  # "closed_form" or "monte_carlo"
    mc_stderr: float | None = None


# sampling ---------------------------------------------------------------


def sample_array(dist: EntryDistribution, rng: np.random.Generator, size) -> np.ndarray:
    """Draw an array of i.i.d. entries; float64 for real laws, complex128 otherwise."""
    kind = dist.kind
    if kind == "zero":
        return np.zeros(size)
    if kind == "pareto":
        # 1 - U lies in (0, 1], so the magnitude is finite and >= 1
        mag = (1.0 - rng.random(size)) ** (-1.0 / dist.alpha)
    elif kind == "sparse_toy":
        height = dist.q ** (-(1.0 - dist.eps) / 2.0)
        mag = np.where(rng.random(size) < dist.q, height, 0.0)
    elif kind == "rademacher":
        mag = np.ones(size)
    elif kind == "gaussian":
        mag = np.abs(rng.standard_normal(size))
    elif kind == "complex_gaussian":
        re = rng.standard_normal(size)
        im = rng.standard_normal(size)
        mag = (re + 1j * im) / math.sqrt(2.0)
    elif kind == "tabulated":
        u = rng.random(size)
        # first bin whose cumulative mass reaches u; exact ties go to the smaller magnitude
        idx = np.searchsorted(dist._cum, u, side="left")
        idx = np.minimum(idx, len(dist._mags) - 1)
        mag = dist._mags[idx]
    else:  # pragma: no cover - guarded by __post_init__
        raise ConfigurationError(kind)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    out = sign * mag
    if dist.scale != 1.0:
        out = out * dist.scale
    return out


def sample(dist: EntryDistribution, rng: np.random.Generator) -> complex:
    return complex(sample_array(dist, rng, 1)[0])


# moments ----------------------------------------------------------------


def _closed_form_moment(dist: EntryDistribution, p: float) -> float | None:
    kind = dist.kind
    if p == 0:
        return 1.0
    if kind == "pareto":
        base = dist.alpha / (dist.alpha - p) if p < dist.alpha else math.inf
    elif kind == "sparse_toy":
        base = dist.q ** (1.0 - p * (1.0 - dist.eps) / 2.0)
    elif kind == "rademacher":
        base = 1.0
    elif kind == "gaussian":
        base = 2.0 ** (p / 2.0) * float(gamma_fn((p + 1.0) / 2.0)) / math.sqrt(math.pi)
    elif kind == "complex_gaussian":
        # |x|^2 is Exp(1)
        base = float(gamma_fn(1.0 + p / 2.0))
    elif kind == "tabulated":
        base = math.fsum(prob * m**p for m, prob in dist.values)
    elif kind == "zero":
        base = 0.0
    else:  # pragma: no cover
        return None
    return base * dist.scale**p if math.isfinite(base) else math.inf


def moment(
    dist: EntryDistribution,
    p: float,
    method: str = "auto",
    samples: int = 1_000_000,
    seed: int = 0,
) -> MomentReport:
    """E|x|^p. Infinite moments come back as ``math.inf``, not as errors."""
    if p < 0:
        raise ConfigurationError(f"moment order must be >= 0, got {p}")
    if method in ("auto", "closed_form"):
        value = _closed_form_moment(dist, p)
        if value is not None:
            return MomentReport(p=p, value=value, method="closed_form")
        if method == "closed_form":
            raise UnsupportedError(f"no closed form for {dist.kind}")
    if method not in ("auto", "monte_carlo"):
        raise ConfigurationError(f"unknown moment method {method!r}")
    if p >= dist.tail_index:
        return MomentReport(p=p, value=math.inf, method="monte_carlo")
    x = np.abs(sample_array(dist, np.random.default_rng(seed), samples)) ** p
    return MomentReport(
        p=p,
        value=float(x.mean()),
        method="monte_carlo",
        mc_stderr=float(x.std(ddof=1) / math.sqrt(samples)),
    )


def normalize_to_unit_second_moment(dist: EntryDistribution) -> tuple[float, EntryDistribution]:
    m2 = moment(dist, 2).value
    if not math.isfinite(m2):
        raise UnsupportedError(f"{dist.kind} has infinite second moment; cannot normalize")
    if m2 <= 0:
        raise UnsupportedError("degenerate law with zero second moment; cannot normalize")
    c = 1.0 / math.sqrt(m2)
    return c, dist.scaled(c)
