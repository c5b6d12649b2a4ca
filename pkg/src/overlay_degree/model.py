"""Domain types shared across the package: rates, desired-degree families, histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from .errors import InvalidParams, NonPositiveRate, ParamsTooLarge
from .special import log_poisson_pmf

DEFAULT_EPSILON = 1e-12
MAX_SCALE_FREE_DEGREE = 10**7

SizeConvention = Literal["floor", "raw"]


@dataclass(frozen=True)
class RateConfig:
    """Per-node attachment rate ``alpha`` and failure rate ``phi``."""

    alpha: float
    phi: float

    def __post_init__(self):
        for name in ("alpha", "phi"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise NonPositiveRate(f"{name} must be a finite nonnegative rate, got {value!r}")

    @property
    def ratio(self) -> float:
        """``2 alpha / phi``, the scale of every closed-form quantity."""
        return 2.0 * self.alpha / self.phi


def validate_rates(cfg: RateConfig, context: Literal["analytic", "simulation"] = "analytic") -> None:
    if context not in ("analytic", "simulation"):
        raise ValueError(f"unknown context {context!r}")
    if context == "analytic":
        if cfg.alpha <= 0 or cfg.phi <= 0:
            raise NonPositiveRate(
                f"analytic solver needs alpha > 0 and phi > 0, got alpha={cfg.alpha}, phi={cfg.phi}"
            )


@dataclass(frozen=True)
class Fixed:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise InvalidParams(f"fixed desired degree must be a nonnegative integer, got {self.n!r}")


@dataclass(frozen=True)
class RandomGraph:
    p: float
    n_nodes: int

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise InvalidParams(f"p must lie in (0, 1), got {self.p!r}")
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 1:
            raise InvalidParams(f"n_nodes must be a positive integer, got {self.n_nodes!r}")

    @property
    def mean_degree(self) -> float:
        return self.p * self.n_nodes


@dataclass(frozen=True)
class ScaleFree:
    """Aiello-style fixed-size power law: about ``e^a / x^b`` nodes of degree ``x``.

    ``convention`` selects how fractional per-degree counts become nodes:
    ``"floor"`` keeps ``floor(e^a / x^b)`` nodes per degree; ``"raw"`` makes the
    total ``floor(sum_x e^a / x^b)`` and hands the leftover units to the degrees
    with the largest fractional parts.
    """

    a: float
    b: float
    convention: SizeConvention = "floor"

    def __post_init__(self):
        if not (self.a >= 0 and self.b > 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidParams(f"scale-free needs a >= 0 and b > 0, got a={self.a!r}, b={self.b!r}")
        if self.convention not in ("floor", "raw"):
            raise InvalidParams(f"unknown size convention {self.convention!r}")


DesiredDegreeDistribution = Union[Fixed, RandomGraph, ScaleFree]


def scale_free_max_degree(a: float, b: float, cap: int = MAX_SCALE_FREE_DEGREE) -> int:
    exponent = a / b
    if exponent > math.log(cap + 1):
        raise ParamsTooLarge(f"max degree e^(a/b) = e^{exponent:.3g} exceeds the cap {cap}")
    return int(math.floor(math.exp(exponent)))


def scale_free_counts(
    a: float, b: float, convention: SizeConvention = "floor", cap: int = MAX_SCALE_FREE_DEGREE
) -> np.ndarray:
    """Node counts per degree; ``counts[x-1]`` nodes have degree ``x``."""
    xmax = scale_free_max_degree(a, b, cap)
    x = np.arange(1, xmax + 1, dtype=float)
    raw = math.exp(a) / x**b
    counts = np.floor(raw).astype(np.int64)
    if convention == "raw":
        leftover = int(math.floor(raw.sum())) - int(counts.sum())
        if leftover > 0:
            # stable sort keeps ties in ascending degree order
            order = np.argsort(-(raw - counts), kind="stable")
            counts[order[:leftover]] += 1
    elif convention != "floor":
        raise InvalidParams(f"unknown size convention {convention!r}")
    return counts


def _poisson_support(mean: float, epsilon: float) -> np.ndarray:
    """Poisson(mean) pmf on ``0..hi`` with upper-tail mass beyond ``hi`` below ``epsilon``."""
    hi_guess = int(mean + 12.0 * math.sqrt(mean) + 40)
    logp = np.array([log_poisson_pmf(k, mean) for k in range(hi_guess + 1)])
    pmf = np.exp(logp)
    # tail mass beyond k, accumulated from the far end so small terms are not swamped
    tail = np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]])
    hi = int(np.argmax(tail < epsilon))
    return pmf[: hi + 1]


def desired_degree_pmf(dist: DesiredDegreeDistribution, epsilon: float = DEFAULT_EPSILON) -> dict[int, float]:
    """Finite-support pmf ``P(dd = j)`` for the three desired-degree families.

    Random graphs are truncated where the Poisson upper tail drops below
    ``epsilon`` and renormalized; the atom at ``j = 0`` is kept.
    """
    if not 0.0 < epsilon <= 1e-6:
        raise InvalidParams(f"epsilon must lie in (0, 1e-6], got {epsilon!r}")
    if isinstance(dist, Fixed):
        return {int(dist.n): 1.0}
    if isinstance(dist, RandomGraph):
        pmf = _poisson_support(dist.mean_degree, epsilon)
        pmf = pmf / pmf.sum()
        return {j: float(p) for j, p in enumerate(pmf)}
    if isinstance(dist, ScaleFree):
        counts = scale_free_counts(dist.a, dist.b, dist.convention)
        total = int(counts.sum())
        return {x: c / total for x, c in enumerate(counts.tolist(), start=1) if c > 0}
    raise InvalidParams(f"unsupported desired-degree distribution {dist!r}")


def pmf_to_array(pmf: dict[int, float]) -> np.ndarray:
    out = np.zeros(max(pmf) + 1)
    for k, p in pmf.items():
        out[k] = p
    return out


@dataclass(frozen=True)
class DegreeHistogram:
    """Probability mass over degrees; ``probs[k]`` is the mass on degree ``k``."""

    probs: np.ndarray
    source: Literal["analytic", "empirical"]
    sample_count: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidParams("histogram needs a nonempty 1-d probability vector")
        if np.any(probs < 0) or np.any(probs > 1):
            raise InvalidParams("histogram probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise InvalidParams(f"histogram mass is {probs.sum()!r}, expected 1")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_counts(cls, counts, source="empirical", **meta) -> "DegreeHistogram":
        counts = np.asarray(counts, dtype=float)
        total = counts.sum()
        return cls(counts / total, source, int(round(total)), meta)

    @property
    def max_degree(self) -> int:
        return self.probs.size - 1

    def cdf(self) -> np.ndarray:
        return np.minimum(np.cumsum(self.probs), 1.0)

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(max(length, self.probs.size))
        out[: self.probs.size] = self.probs
        return out

    def as_dict(self) -> dict[int, float]:
        return {k: float(p) for k, p in enumerate(self.probs) if p > 0}

    def mean(self) -> float:
        return float(np.dot(np.arange(self.probs.size), self.probs))

    def mode(self) -> int:
        return int(np.argmax(self.probs))


def average_histograms(hists: list[DegreeHistogram]) -> DegreeHistogram:
    """Unweighted mean of several histograms (replica averaging)."""
    if not hists:
        raise InvalidParams("need at least one histogram to average")
    length = max(h.probs.size for h in hists)
    stacked = np.stack([h.padded(length) for h in hists])
    probs = stacked.mean(axis=0)
    probs /= probs.sum()
    return DegreeHistogram(
        probs, hists[0].source, sum(h.sample_count for h in hists), {"replicas": len(hists)}
    )
