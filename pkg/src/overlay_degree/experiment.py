"""Replica simulations and their aggregation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .model import DegreeHistogram, DesiredDegreeDistribution, RateConfig, average_histograms
from .netgen import ConstructionReport, build_overlay
from .sim import SimConfig, run, snapshot_degrees


@dataclass
class ReplicaResult:
    index: int
    seed: int
    final: DegreeHistogram
    time_averaged: DegreeHistogram
    failures: int
    attachments: int
    rejections: int
    construction: ConstructionReport | None


def run_replica(dist: DesiredDegreeDistribution, rates: RateConfig, n_nodes: int | None,
                t_end: float, seed: int, index: int = 0) -> ReplicaResult:
    graph = build_overlay(dist, n_nodes, seed)
    state = run(SimConfig(rates, graph, t_end, seed))
    return ReplicaResult(index, seed, snapshot_degrees(state), state.time_averaged_histogram(),
                         state.failures, state.attachments, state.rejections, graph.report)


def run_replicas(dist: DesiredDegreeDistribution, rates: RateConfig, n_nodes: int | None,
                 t_end: float, runs: int, base_seed: int = 0, workers: int = 1) -> list[ReplicaResult]:
    """Run ``runs`` independent simulations; run ``k`` uses seed ``base_seed + k``.

    Results come back in run order whatever the worker count, so any
    aggregate is reproducible.
    """
    if runs < 1:
        raise ValueError(f"runs must be at least 1, got {runs}")
    jobs = [(dist, rates, n_nodes, t_end, base_seed + k, k) for k in range(runs)]
    if workers <= 1:
        return [run_replica(*job) for job in jobs]
    # the event kernel releases the GIL, so threads run replicas in parallel
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: run_replica(*job), jobs))


def averaged(results: list[ReplicaResult]) -> tuple[DegreeHistogram, DegreeHistogram]:
    """Replica means of the final snapshots and of the time-averaged histograms."""
    return (average_histograms([r.final for r in results]),
            average_histograms([r.time_averaged for r in results]))
