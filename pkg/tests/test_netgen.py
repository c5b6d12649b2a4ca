import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overlay_degree.errors import InvalidParams, ParamsTooLarge
from overlay_degree.model import Fixed, RandomGraph, ScaleFree
from overlay_degree.netgen import (
    OverlayGraph,
    aiello_network_size,
    build_overlay,
    degree_class_counts,
    read_edgelist,
    sample_desired_degrees,
    stub_matching,
    write_edgelist,
)


def brute_force_size(a, b, convention):
    terms = [math.exp(a) / x**b for x in range(1, math.floor(math.exp(a / b)) + 1)]
    if convention == "floor":
        return sum(math.floor(t) for t in terms)
    return math.floor(sum(terms))


@pytest.mark.parametrize("a, b", [(3, 0.5), (4.5, 0.8), (5, 0.9), (3.2, 0.5), (3.2, 0.45), (2.0, 1.3)])
@pytest.mark.parametrize("convention", ["floor", "raw"])
def test_aiello_size_matches_brute_force(a, b, convention):
    assert aiello_network_size(a, b, convention) == brute_force_size(a, b, convention)


def test_aiello_reference_sizes_by_convention():
    # sum of per-degree floors
    assert aiello_network_size(4.5, 0.8) == 876
    assert aiello_network_size(5, 0.9) == 1079
    # floor of the unrounded sum
    assert aiello_network_size(3, 0.5, "raw") == 777
    assert aiello_network_size(3.2, 0.5, "raw") == 1167
    assert aiello_network_size(3.2, 0.45, "raw") == 2196


def test_aiello_trivial():
    assert aiello_network_size(0, 1) == 1


def test_aiello_cap():
    with pytest.raises(ParamsTooLarge):
        aiello_network_size(20, 1)
    with pytest.raises(ParamsTooLarge):
        aiello_network_size(5, 0.9, cap=100)


def test_sample_fixed():
    dd = sample_desired_degrees(Fixed(30), 1000, seed=4)
    assert dd.shape == (1000,) and np.all(dd == 30)


@pytest.mark.parametrize("convention, size", [("floor", 1778), ("raw", 2196)])
def test_sample_scale_free_exact_multiset(convention, size):
    dd = sample_desired_degrees(ScaleFree(3.2, 0.45, convention))
    assert dd.size == size
    floor_counts = {x: math.floor(math.exp(3.2) / x**0.45) for x in range(1, 1226)}
    counts = degree_class_counts(dd)
    if convention == "floor":
        assert counts == {x: c for x, c in floor_counts.items() if c}


def test_sample_random_graph_mean():
    dd = sample_desired_degrees(RandomGraph(0.2, 1000), 1000, seed=7)
    assert dd.size == 1000
    assert abs(dd.mean() - 200) < 5 * math.sqrt(200) / math.sqrt(1000)
    assert np.array_equal(dd, sample_desired_degrees(RandomGraph(0.2, 1000), 1000, seed=7))


def test_sample_needs_size():
    with pytest.raises(InvalidParams):
        sample_desired_degrees(Fixed(3))


def test_stub_matching_trivial():
    assert stub_matching([1, 1]).edges() == [(0, 1)]
    g = stub_matching([2, 1, 1], seed=3)
    # either the star forms, or the two leaves pair and node 0 is stuck
    assert g.edges() in ([(0, 1), (0, 2)], [(1, 2)])
    assert 2 * g.n_edges + g.report.unfilled_stubs == 4


def test_stub_matching_odd_total_leaves_one_stub():
    g = stub_matching([1, 1, 1], seed=0)
    assert g.n_edges == 1 and g.report.unfilled_stubs == 1


def test_stub_matching_impossible_pair_terminates():
    g = stub_matching([2, 1], seed=0)  # node 0 would need a double edge
    assert g.edges() == [(0, 1)]
    assert g.report.unfilled_stubs == 1


@pytest.mark.parametrize("seed", range(30))
def test_regular_graph_construction(seed):
    g = stub_matching(np.full(1000, 30), seed=seed)
    g.check_invariants()
    assert g.report.unfilled_stubs <= 30  # 0.1 % of 30000 stubs
    assert g.n_edges >= 15000 - 15
    if g.report.unfilled_stubs == 0:
        assert np.all(g.degrees() == 30) and g.n_edges == 15000


def test_stub_matching_deterministic():
    a = stub_matching(np.full(200, 7), seed=11)
    b = stub_matching(np.full(200, 7), seed=11)
    assert a.edges() == b.edges()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 12), min_size=1, max_size=60), st.integers(0, 2**31))
def test_stub_matching_invariants(desired, seed):
    g = stub_matching(desired, seed=seed)
    g.check_invariants()
    assert np.all(g.degrees() <= np.asarray(desired))
    assert 2 * g.n_edges + g.report.unfilled_stubs == sum(desired)


def test_scale_free_overlay():
    g = build_overlay(ScaleFree(3.0, 0.5), seed=2)
    g.check_invariants()
    assert g.n_nodes == 636
    assert g.report.unfilled_fraction < 0.1  # hubs run out of distinct partners


def test_edgelist_roundtrip(tmp_path):
    g = stub_matching(np.full(50, 4), seed=1)
    path = tmp_path / "g.txt"
    write_edgelist(g, path)
    lines = path.read_text().splitlines()
    assert lines[0] == f"50 {g.n_edges}"
    assert all(int(u) < int(v) for u, v in (line.split() for line in lines[1:]))
    back = read_edgelist(path, desired=g.desired)
    assert back.edges() == g.edges()
    assert np.array_equal(read_edgelist(path).desired, g.degrees())


def test_edgelist_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 2\n0 1\n")
    with pytest.raises(InvalidParams):
        read_edgelist(path)


def test_invariant_checker_catches_asymmetry():
    g = OverlayGraph(np.array([1, 1]), [{1}, set()])
    with pytest.raises(AssertionError):
        g.check_invariants()
