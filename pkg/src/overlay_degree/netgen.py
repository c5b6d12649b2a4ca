"""Initial overlay construction: desired-degree sampling and stub matching."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParams
from .model import (
    MAX_SCALE_FREE_DEGREE,
    DesiredDegreeDistribution,
    Fixed,
    RandomGraph,
    ScaleFree,
    SizeConvention,
    scale_free_counts,
)

MATCHING_ROUNDS = 100


def aiello_network_size(
    a: float, b: float, convention: SizeConvention = "floor", cap: int = MAX_SCALE_FREE_DEGREE
) -> int:
    """Number of nodes in the fixed-size power-law network with parameters ``(a, b)``.

    ``"floor"`` sums ``floor(e^a / x^b)`` over ``x = 1..floor(e^(a/b))``;
    ``"raw"`` floors the sum of the unrounded terms instead.
    """
    if a < 0 or b <= 0:
        raise InvalidParams(f"need a >= 0 and b > 0, got a={a}, b={b}")
    return int(scale_free_counts(a, b, convention, cap).sum())


def sample_desired_degrees(dist: DesiredDegreeDistribution, n_nodes: int | None = None, seed: int = 0) -> np.ndarray:
    """Desired degree of every node; scale-free networks fix their own size."""
    if isinstance(dist, ScaleFree):
        counts = scale_free_counts(dist.a, dist.b, dist.convention)
        return np.repeat(np.arange(1, counts.size + 1, dtype=np.int64), counts)
    if n_nodes is None or n_nodes < 1:
        raise InvalidParams(f"n_nodes must be a positive integer, got {n_nodes!r}")
    if isinstance(dist, Fixed):
        return np.full(n_nodes, dist.n, dtype=np.int64)
    if isinstance(dist, RandomGraph):
        rng = np.random.default_rng(seed)
        return rng.poisson(dist.mean_degree, size=n_nodes).astype(np.int64)
    raise InvalidParams(f"unsupported desired-degree distribution {dist!r}")


@dataclass
class ConstructionReport:
    stubs: int
    unfilled_stubs: int
    rounds: int
    self_loop_collisions: int = 0
    duplicate_collisions: int = 0

    @property
    def unfilled_fraction(self) -> float:
        return self.unfilled_stubs / self.stubs if self.stubs else 0.0


@dataclass
class OverlayGraph:
    """Simple undirected overlay where node ``v`` wants ``desired[v]`` links."""

    desired: np.ndarray
    adjacency: list[set[int]]
    report: ConstructionReport | None = field(default=None, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.adjacency)

    @property
    def n_edges(self) -> int:
        return sum(len(nb) for nb in self.adjacency) // 2

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(nb) for nb in self.adjacency), dtype=np.int64, count=self.n_nodes)

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v)

    def check_invariants(self) -> None:
        """Raise ``AssertionError`` unless the graph is simple, symmetric and within ``desired``."""
        if len(self.desired) != self.n_nodes:
            raise AssertionError("desired-degree vector and adjacency disagree on size")
        for v, nb in enumerate(self.adjacency):
            if v in nb:
                raise AssertionError(f"self-loop at {v}")
            if len(nb) > self.desired[v]:
                raise AssertionError(f"node {v} has degree {len(nb)} > desired {self.desired[v]}")
            for u in nb:
                if v not in self.adjacency[u]:
                    raise AssertionError(f"edge {v}-{u} is not symmetric")

    def copy(self) -> "OverlayGraph":
        return OverlayGraph(self.desired.copy(), [set(nb) for nb in self.adjacency], self.report)

    @classmethod
    def from_edges(cls, desired, edges) -> "OverlayGraph":
        desired = np.asarray(desired, dtype=np.int64)
        adjacency: list[set[int]] = [set() for _ in range(desired.size)]
        for u, v in edges:
            adjacency[u].add(v)
            adjacency[v].add(u)
        return cls(desired, adjacency)


def stub_matching(desired, seed: int = 0, rounds: int = MATCHING_ROUNDS) -> OverlayGraph:
    """Configuration-model wiring without self-loops or multi-edges.

    Stubs are shuffled and paired in order.  A pair that would form a self-loop
    or repeat an existing edge is returned to the pool, which is reshuffled and
    re-paired for up to ``rounds`` passes.  Whatever is left stays unfilled and
    is counted in the construction report.
    """
    desired = np.asarray(desired, dtype=np.int64)
    if desired.ndim != 1 or np.any(desired < 0):
        raise InvalidParams("desired degrees must be a 1-d array of nonnegative integers")
    rng = np.random.default_rng(seed)
    n = desired.size
    pool = np.repeat(np.arange(n, dtype=np.int64), desired)
    adjacency: list[set[int]] = [set() for _ in range(n)]
    report = ConstructionReport(stubs=int(pool.size), unfilled_stubs=0, rounds=0)
    for _ in range(rounds):
        if pool.size < 2:
            break
        report.rounds += 1
        rng.shuffle(pool)
        leftover = [int(pool[-1])] if pool.size % 2 else []
        paired = pool[: pool.size - (pool.size % 2)].reshape(-1, 2).tolist()
        for u, v in paired:
            if u == v:
                report.self_loop_collisions += 1
                leftover += (u, v)
            elif v in adjacency[u]:
                report.duplicate_collisions += 1
                leftover += (u, v)
            else:
                adjacency[u].add(v)
                adjacency[v].add(u)
        if len(leftover) == pool.size:
            if _stuck(leftover, adjacency):
                break
        pool = np.asarray(leftover, dtype=np.int64)
    report.unfilled_stubs = int(pool.size)
    return OverlayGraph(desired, adjacency, report)


def _stuck(stubs: list[int], adjacency: list[set[int]]) -> bool:
    # no pair of remaining stubs can ever be joined
    owners = sorted(set(stubs))
    for x in range(len(owners)):
        for y in range(x + 1, len(owners)):
            if owners[y] not in adjacency[owners[x]]:
                return False
    return True


def build_overlay(dist: DesiredDegreeDistribution, n_nodes: int | None = None, seed: int = 0) -> OverlayGraph:
    """Sample desired degrees and wire them; every node starts at (or near) its target."""
    seeds = np.random.SeedSequence(seed).spawn(2)
    sample_seed, match_seed = (int(s.generate_state(1)[0]) for s in seeds)
    desired = sample_desired_degrees(dist, n_nodes, sample_seed)
    return stub_matching(desired, match_seed)


def write_edgelist(graph: OverlayGraph, path) -> None:
    """Header ``n_nodes m_edges``, then one ``u v`` line per edge with ``u < v``."""
    edges = graph.edges()
    lines = [f"{graph.n_nodes} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edgelist(path, desired=None) -> OverlayGraph:
    """Inverse of :func:`write_edgelist`; ``desired`` defaults to the read degrees."""
    rows = Path(path).read_text().split("\n")
    header = rows[0].split()
    if len(header) != 2:
        raise InvalidParams(f"bad edge-list header {rows[0]!r}")
    n, m = int(header[0]), int(header[1])
    edges = []
    for line in rows[1:]:
        if not line.strip():
            continue
        u, v = (int(x) for x in line.split())
        if not (0 <= u < v < n):
            raise InvalidParams(f"bad edge line {line!r}")
        edges.append((u, v))
    if len(edges) != m:
        raise InvalidParams(f"header declares {m} edges, found {len(edges)}")
    if desired is None:
        degree = np.zeros(n, dtype=np.int64)
        for u, v in edges:
            degree[u] += 1
            degree[v] += 1
        desired = degree
    return OverlayGraph.from_edges(desired, edges)


def degree_class_counts(desired) -> dict[int, int]:
    values, counts = np.unique(np.asarray(desired), return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


__all__ = [
    "ConstructionReport",
    "OverlayGraph",
    "aiello_network_size",
    "build_overlay",
    "degree_class_counts",
    "read_edgelist",
    "sample_desired_degrees",
    "stub_matching",
    "write_edgelist",
]
