"""Neighbour counts, the diameter estimate, and histogram comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import InvalidParams, NoGiantComponent, UndefinedForZeroZ1
from .model import DegreeHistogram
from .netgen import OverlayGraph

UNRELIABLE_RATIO = 2.0


def neighbour_moments(hist: DegreeHistogram) -> tuple[float, float]:
    """Mean first- and second-neighbour counts ``z1 = <k>``, ``z2 = <k^2> - <k>``."""
    k = np.arange(hist.probs.size, dtype=float)
    z1 = float(np.dot(k, hist.probs))
    z2 = float(np.dot(k * (k - 1.0), hist.probs))
    return z1, z2


def neighbours_at_distance(z1: float, z2: float, m: int) -> float:
    """``z_m = (z2 / z1)^(m-1) z1``."""
    if z1 <= 0:
        raise UndefinedForZeroZ1(f"z1 must be positive, got {z1}")
    if m < 1:
        raise InvalidParams(f"distance must be a positive integer, got {m}")
    if m == 1:
        return z1
    if m == 2:
        return z2
    return (z2 / z1) ** (m - 1) * z1


def estimate_diameter(n_nodes: int, z1: float, z2: float) -> float:
    """Hops ``l`` after which ``z_l`` reaches the network size (unrounded)."""
    if z1 <= 0:
        raise UndefinedForZeroZ1(f"z1 must be positive, got {z1}")
    if z2 <= z1:
        raise NoGiantComponent(f"z2={z2:.6g} <= z1={z1:.6g}: no giant component")
    if n_nodes <= z1:
        raise InvalidParams(f"network size {n_nodes} must exceed z1={z1:.6g}")
    return math.log(n_nodes / z1) / math.log(z2 / z1) + 1.0


@dataclass(frozen=True)
class NetworkMetrics:
    n_nodes: int
    z1: float
    z2: float
    diameter: float | None
    giant_component: bool
    unreliable: bool  # z2/z1 close to 1 makes the diameter estimate shaky

    def z(self, m: int) -> float:
        return neighbours_at_distance(self.z1, self.z2, m)


def network_metrics(hist: DegreeHistogram, n_nodes: int) -> NetworkMetrics:
    z1, z2 = neighbour_moments(hist)
    giant = z2 > z1
    diameter = None
    if giant and z1 > 0 and n_nodes > z1:
        diameter = estimate_diameter(n_nodes, z1, z2)
    unreliable = not giant or z1 <= 0 or z2 / z1 < UNRELIABLE_RATIO
    return NetworkMetrics(n_nodes, z1, z2, diameter, giant, unreliable)


@dataclass(frozen=True)
class ComparisonReport:
    l1: float
    ks: float
    deltas: np.ndarray  # a.probs - b.probs on the common support


def compare_histograms(a: DegreeHistogram, b: DegreeHistogram) -> ComparisonReport:
    length = max(a.probs.size, b.probs.size)
    pa, pb = a.padded(length), b.padded(length)
    deltas = pa - pb
    l1 = float(np.abs(deltas).sum())
    ks = float(np.abs(np.cumsum(pa) - np.cumsum(pb)).max())
    return ComparisonReport(min(l1, 2.0), min(ks, 1.0), deltas)


@dataclass(frozen=True)
class DistanceReport:
    mean_distance: float
    unreachable_fraction: float
    pairs: int
    sources: int


def _csr(graph: OverlayGraph) -> csr_matrix:
    edges = graph.edges()
    n = graph.n_nodes
    if not edges:
        return csr_matrix((n, n))
    u, v = np.array(edges, dtype=np.int64).T
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    return csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))


def measure_empirical_distances(graph: OverlayGraph, sample_size: int, seed: int = 0) -> DistanceReport:
    """Breadth-first hop counts from ``sample_size`` random sources.

    The mean runs over reachable ordered pairs ``(source, target)`` with
    ``target != source``; pairs with no path are reported as a fraction.
    """
    n = graph.n_nodes
    if n < 1:
        raise InvalidParams("graph must have at least one node")
    if sample_size < 1:
        raise InvalidParams(f"sample_size must be positive, got {sample_size}")
    rng = np.random.default_rng(seed)
    k = min(sample_size, n)
    sources = np.sort(rng.choice(n, size=k, replace=False))
    dist = shortest_path(_csr(graph), method="D", directed=False, unweighted=True, indices=sources)
    dist[np.arange(k), sources] = np.nan  # drop the zero self-distances
    off_diagonal = ~np.isnan(dist)
    reachable = off_diagonal & np.isfinite(dist)
    total = int(off_diagonal.sum())
    hits = int(reachable.sum())
    mean = float(dist[reachable].mean()) if hits else math.nan
    unreachable = 1.0 - hits / total if total else 0.0
    return DistanceReport(mean, unreachable, hits, k)


def loglog_fit(degrees: np.ndarray, probs: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line through ``(log k, log p)``; returns ``(slope, intercept, r_squared)``."""
    x = np.log(np.asarray(degrees, dtype=float))
    y = np.log(np.asarray(probs, dtype=float))
    if x.size < 3:
        raise InvalidParams("need at least three points for a log-log fit")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
