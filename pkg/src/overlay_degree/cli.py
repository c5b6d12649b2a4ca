"""Experiment runner: ``overlay-degree <mode> --config <path> [--out DIR] [--seed N] [--workers N]``.

Config files are flat ``key = value`` lines (``#`` starts a comment)::

    alpha = 0.5
    phi = 0.01
    dd_dist = fixed 30            # or: random-graph 0.2 1000 | scale-free 3.0 0.5 [floor|raw]
    n_nodes = 1000
    t_end = 10000
    runs = 30
    seed = 0
    epsilon = 1e-12
    phi_list = 0.001, 0.005, 0.01, 0.05, 0.1     # diameter-sweep
    ab_pairs = 3:0.5, 4.5:0.8                    # netsize
    size_convention = floor                      # netsize
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analytic import degree_distribution
from .errors import ConfigError, OverlayModelError
from .experiment import averaged, run_replicas
from .metrics import compare_histograms, network_metrics
from .model import (
    DEFAULT_EPSILON,
    DegreeHistogram,
    DesiredDegreeDistribution,
    Fixed,
    RandomGraph,
    RateConfig,
    ScaleFree,
    scale_free_max_degree,
    validate_rates,
)
from .netgen import aiello_network_size

log = logging.getLogger("overlay_degree")

MODES = ("analytic", "simulate", "compare", "diameter-sweep", "netsize")
DEGREE_HEADER = ["degree", "analytic_p", "analytic_cdf", "empirical_p", "empirical_cdf"]
DEFAULT_AB_PAIRS = ((3.0, 0.5), (4.5, 0.8), (5.0, 0.9), (3.2, 0.5), (3.2, 0.45))


@dataclass
class ExperimentConfig:
    mode: str
    dist: DesiredDegreeDistribution = field(default_factory=lambda: Fixed(30))
    alpha: float = 0.5
    phi: float = 0.01
    n_nodes: int | None = None
    t_end: float = 1e4
    runs: int = 30
    seed: int = 0
    epsilon: float = DEFAULT_EPSILON
    phi_list: tuple[float, ...] = (0.001, 0.005, 0.01, 0.05, 0.1)
    ab_pairs: tuple[tuple[float, float], ...] = DEFAULT_AB_PAIRS
    size_convention: str = "floor"
    workers: int = 1
    out: Path = Path("out")

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.t_end <= 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")

    @property
    def rates(self) -> RateConfig:
        return RateConfig(self.alpha, self.phi)

    def network_size(self) -> int:
        if isinstance(self.dist, ScaleFree):
            return aiello_network_size(self.dist.a, self.dist.b, self.dist.convention)
        if self.n_nodes is not None:
            return self.n_nodes
        if isinstance(self.dist, RandomGraph):
            return self.dist.n_nodes
        return 1000


def parse_dd_dist(text: str) -> DesiredDegreeDistribution:
    parts = text.split()
    if not parts:
        raise ConfigError("empty dd_dist")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "fixed" and len(args) == 1:
            return Fixed(int(args[0]))
        if kind == "random-graph" and len(args) == 2:
            return RandomGraph(float(args[0]), int(args[1]))
        if kind == "scale-free" and len(args) in (2, 3):
            return ScaleFree(float(args[0]), float(args[1]), *(args[2:]))
    except ValueError as exc:
        raise ConfigError(f"bad dd_dist {text!r}: {exc}") from exc
    raise ConfigError(f"bad dd_dist {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _pairs(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in text.replace(",", " ").split():
        a, _, b = item.partition(":")
        out.append((float(a), float(b)))
    return tuple(out)


_PARSERS = {
    "alpha": float,
    "phi": float,
    "n_nodes": int,
    "t_end": float,
    "runs": int,
    "seed": int,
    "epsilon": float,
    "phi_list": _floats,
    "ab_pairs": _pairs,
    "size_convention": str,
    "workers": int,
    "out": Path,
}


def parse_config(text: str, mode: str) -> ExperimentConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        if key == "mode":
            continue
        if key == "dd_dist":
            values["dist"] = parse_dd_dist(value)
            continue
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return ExperimentConfig(mode=mode, **values)


def _fmt(p: float) -> str:
    return format(float(p), ".12g")


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def degree_rows(analytic: DegreeHistogram | None, empirical: DegreeHistogram | None) -> list[list[str]]:
    sides = [h for h in (analytic, empirical) if h is not None]
    length = max(h.probs.size for h in sides)
    columns = []
    for h in (analytic, empirical):
        if h is None:
            columns.append(None)
        else:
            p = h.padded(length)
            columns.append((p, np.minimum(np.cumsum(p), 1.0)))
    rows = []
    for k in range(length):
        row = [str(k)]
        for col in columns:
            row += ["", ""] if col is None else [_fmt(col[0][k]), _fmt(col[1][k])]
        rows.append(row)
    return rows


def loglog_rows(analytic: DegreeHistogram, empirical: DegreeHistogram) -> list[list[str]]:
    length = max(analytic.probs.size, empirical.probs.size)
    pa, pe = analytic.padded(length), empirical.padded(length)
    rows = []
    for k in range(1, length):
        if pa[k] > 0 or pe[k] > 0:
            rows.append([str(k), _fmt(pa[k]) if pa[k] > 0 else "", _fmt(pe[k]) if pe[k] > 0 else ""])
    return rows


def _dist_label(dist: DesiredDegreeDistribution) -> str:
    if isinstance(dist, Fixed):
        return f"fixed {dist.n}"
    if isinstance(dist, RandomGraph):
        return f"random-graph {dist.p} {dist.n_nodes}"
    return f"scale-free {dist.a} {dist.b} {dist.convention}"


def _simulate(cfg: ExperimentConfig):
    validate_rates(cfg.rates, "simulation")
    n_nodes = None if isinstance(cfg.dist, ScaleFree) else cfg.network_size()
    results = run_replicas(cfg.dist, cfg.rates, n_nodes, cfg.t_end, cfg.runs, cfg.seed, cfg.workers)
    return results, *averaged(results)


def run_experiment(cfg: ExperimentConfig) -> list[str]:
    """Execute one experiment, write its CSV files and ``report.txt``; returns the report lines."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    report = [f"mode: {cfg.mode}"]
    if cfg.mode != "netsize":
        report.append(f"dd_dist: {_dist_label(cfg.dist)}")
    if cfg.mode in ("analytic", "simulate", "compare"):
        report.append(f"alpha: {cfg.alpha}")
        report.append(f"phi: {cfg.phi}")

    if cfg.mode == "analytic":
        hist = degree_distribution(cfg.dist, cfg.rates, cfg.epsilon)
        _write_csv(out / "degree.csv", DEGREE_HEADER, degree_rows(hist, None))
        m = network_metrics(hist, cfg.network_size())
        report += [f"mean_degree: {_fmt(m.z1)}", f"z2: {_fmt(m.z2)}", f"mode_degree: {hist.mode()}"]

    elif cfg.mode in ("simulate", "compare"):
        report += [f"n_nodes: {cfg.network_size()}", f"t_end: {cfg.t_end}", f"runs: {cfg.runs}",
                   f"base_seed: {cfg.seed}"]
        results, final, timeavg = _simulate(cfg)
        analytic = degree_distribution(cfg.dist, cfg.rates, cfg.epsilon) if cfg.mode == "compare" else None
        for r in results:
            _write_csv(out / "runs" / f"run_{r.index:03d}.csv", DEGREE_HEADER,
                       degree_rows(None, r.time_averaged))
            _write_csv(out / "runs" / f"run_{r.index:03d}_final.csv", DEGREE_HEADER,
                       degree_rows(None, r.final))
        if cfg.mode == "simulate":
            _write_csv(out / "empirical.csv", DEGREE_HEADER, degree_rows(None, timeavg))
            _write_csv(out / "empirical_final.csv", DEGREE_HEADER, degree_rows(None, final))
        else:
            _write_csv(out / "compare.csv", DEGREE_HEADER, degree_rows(analytic, timeavg))
            _write_csv(out / "compare_final.csv", DEGREE_HEADER, degree_rows(analytic, final))
            _write_csv(out / "loglog.csv", ["degree", "analytic_p", "empirical_p"],
                       loglog_rows(analytic, timeavg))
            summary = []
            for label, emp in (("time_averaged", timeavg), ("final", final)):
                cmp = compare_histograms(analytic, emp)
                summary.append([label, _fmt(cmp.l1), _fmt(cmp.ks)])
                report.append(f"{label}: L1={_fmt(cmp.l1)} KS={_fmt(cmp.ks)}")
            _write_csv(out / "summary.csv", ["measure", "l1", "ks"], summary)
        report.append(f"failures: {sum(r.failures for r in results)}")
        report.append(f"attachments: {sum(r.attachments for r in results)}")
        report.append(f"rejections: {sum(r.rejections for r in results)}")
        unfilled = sum(r.construction.unfilled_stubs for r in results if r.construction)
        report.append(f"unfilled_initial_stubs: {unfilled}")

    elif cfg.mode == "diameter-sweep":
        n = cfg.network_size()
        report.append(f"alpha: {cfg.alpha}")
        report.append(f"n_nodes: {n}")
        rows = []
        for phi in cfg.phi_list:
            rates = RateConfig(cfg.alpha, phi)
            m = network_metrics(degree_distribution(cfg.dist, rates, cfg.epsilon), n)
            rows.append([_fmt(phi), _fmt(m.z1), _fmt(m.z2), "" if m.diameter is None else _fmt(m.diameter),
                         str(int(m.giant_component)), str(int(m.unreliable))])
        _write_csv(out / "diameter.csv", ["phi", "z1", "z2", "diameter", "giant_component", "unreliable"], rows)
        report.append(f"points: {len(rows)}")

    elif cfg.mode == "netsize":
        rows = []
        for a, b in cfg.ab_pairs:
            size = aiello_network_size(a, b, cfg.size_convention)
            rows.append([_fmt(a), _fmt(b), str(scale_free_max_degree(a, b)), str(size)])
            report.append(f"a={_fmt(a)} b={_fmt(b)}: {size} nodes")
        _write_csv(out / "netsize.csv", ["a", "b", "max_degree", "n_nodes"], rows)
        report.append(f"size_convention: {cfg.size_convention}")

    (out / "report.txt").write_text("\n".join(report) + "\n")
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="overlay-degree", description=__doc__.split("\n\n")[0])
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, type=Path, help="key = value experiment file")
    parser.add_argument("--out", type=Path, help="output directory (default: config 'out' or ./out)")
    parser.add_argument("--seed", type=int, help="base seed; run k uses seed + k")
    parser.add_argument("--workers", type=int, help="concurrent replica simulations")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.config.read_text(), args.mode)
        overrides = {k: v for k, v in (("out", args.out), ("seed", args.seed), ("workers", args.workers))
                     if v is not None}
        cfg = replace(cfg, **overrides)
        for line in run_experiment(cfg):
            log.info(line)
    except (OSError, OverlayModelError) as exc:
        print(f"overlay-degree: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
