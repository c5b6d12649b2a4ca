"""Steady-state degree distribution of self-repairing peer-to-peer overlays under node failures."""

from .analytic import (
    ConditionalDegreeTable,
    build_table,
    coefficient_c,
    conditional_degree_prob,
    degree_distribution,
    steady_state_residual,
)
from .metrics import (
    compare_histograms,
    estimate_diameter,
    measure_empirical_distances,
    neighbour_moments,
    neighbours_at_distance,
    network_metrics,
)
from .model import (
    DegreeHistogram,
    Fixed,
    RandomGraph,
    RateConfig,
    ScaleFree,
    desired_degree_pmf,
    validate_rates,
)
from .netgen import OverlayGraph, aiello_network_size, build_overlay, sample_desired_degrees, stub_matching
from .sim import SimConfig, SimState, attempt_attachment, fail_node, run, snapshot_degrees
from .special import exp_sum, regularized_gamma_q

__version__ = "0.1.0"
