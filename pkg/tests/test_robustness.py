import itertools

import numpy as np
import pytest
from hypothesis import given, settings

from robustnet import oracles
from robustnet.graph import (
    DiGraph,
    complete_graph,
    cpa_gap_graph,
    disjoint_union,
    path_graph,
    random_graph,
    star_graph,
    tight_robust_graph,
    two_clique_blocks,
    two_clique_graph,
)
from robustnet.robustness import (
    ENV_LIMIT,
    SizeLimitError,
    analyze,
    f_local_sets,
    has_spanning_tree,
    is_f_local,
    is_r_reachable,
    is_r_robust,
    is_strongly_r_robust,
    max_robustness,
    max_strong_robustness,
    non_reachable_pair,
)

from conftest import graphs


def test_reachability_examples():
    k4 = complete_graph(4)
    assert is_r_reachable(k4, {0}, 3)
    assert not is_r_reachable(k4, {0}, 4)
    assert is_r_reachable(k4, {0, 1}, 2)
    assert not is_r_reachable(k4, range(4), 1)
    with pytest.raises(ValueError):
        is_r_reachable(k4, set(), 1)


@pytest.mark.parametrize("n", range(2, 8))
def test_complete_graph_robustness(n):
    assert max_robustness(complete_graph(n)) == (n + 1) // 2


def test_small_examples():
    assert max_robustness(path_graph(4)) == 1
    assert max_robustness(star_graph(5)) == 1
    assert not is_strongly_r_robust(star_graph(5), 2)
    assert max_robustness(disjoint_union(complete_graph(3), complete_graph(3))) == 0


def test_degenerate_sizes():
    one = complete_graph(1)
    assert max_robustness(one) == 0
    assert is_r_robust(one, 3)
    assert non_reachable_pair(one, 1) is None


def test_two_clique_graph_only_1_robust():
    g = two_clique_graph(10, 1)
    assert max_robustness(g) == 1
    a, b = non_reachable_pair(g, 2)
    assert {a, b} == set(two_clique_blocks(10))


def test_tight_graph_is_exactly_2_robust():
    g = tight_robust_graph(1)
    assert is_r_robust(g, 2) and not is_r_robust(g, 3)
    assert oracles.naive_max_robustness(g) == 2


def test_cpa_gap_graph_strongly_3_robust():
    g = cpa_gap_graph()
    assert is_strongly_r_robust(g, 3)
    assert oracles.naive_is_strongly_r_robust(g, 3)
    assert max_strong_robustness(g) == 3


def test_complete_graph_strong_robustness_saturates():
    # every subset of K_n has a member adjacent to everything outside it
    assert max_strong_robustness(complete_graph(5)) == 5
    assert is_strongly_r_robust(complete_graph(5), 4)
    assert not is_r_robust(complete_graph(5), 4)


@settings(max_examples=150, deadline=None)
@given(graphs(max_n=7))
def test_fast_checkers_match_oracles(g):
    assert max_robustness(g) == oracles.naive_max_robustness(g)
    for r in range(1, g.n + 1):
        assert is_strongly_r_robust(g, r) == oracles.naive_is_strongly_r_robust(g, r)


@settings(max_examples=100, deadline=None)
@given(graphs(max_n=7))
def test_robustness_monotone_in_r(g):
    flags = [is_r_robust(g, r) for r in range(1, g.n + 2)]
    strong = [is_strongly_r_robust(g, r) for r in range(1, g.n + 2)]
    assert flags == sorted(flags, reverse=True)
    assert strong == sorted(strong, reverse=True)


@settings(max_examples=100, deadline=None)
@given(graphs(max_n=7))
def test_strong_implies_standard_when_2r_at_most_n(g):
    for r in range(1, g.n // 2 + 1):
        if is_strongly_r_robust(g, r):
            assert is_r_robust(g, r)


@settings(max_examples=100, deadline=None)
@given(graphs(max_n=7))
def test_reachable_is_monotone(g):
    for mask in range(1, 2 ** g.n):
        s = {i for i in range(g.n) if mask >> i & 1}
        levels = [is_r_reachable(g, s, r) for r in range(1, g.n + 1)]
        assert levels == sorted(levels, reverse=True)


@settings(max_examples=100, deadline=None)
@given(graphs(max_n=7))
def test_witness_is_genuine(g):
    for r in range(1, g.n + 1):
        pair = non_reachable_pair(g, r)
        assert (pair is None) == is_r_robust(g, r)
        if pair is not None:
            a, b = pair
            assert a and b and not a & b
            assert not oracles.naive_reachable(g, set(a), r)
            assert not oracles.naive_reachable(g, set(b), r)


@settings(max_examples=100, deadline=None)
@given(graphs(max_n=7))
def test_one_robust_has_spanning_tree(g):
    if is_r_robust(g, 1):
        assert has_spanning_tree(g)


def test_spanning_tree_examples():
    assert has_spanning_tree(DiGraph.from_edges(3, [(0, 1), (1, 2)], directed=True))
    assert not has_spanning_tree(DiGraph.from_edges(3, [(0, 2), (1, 2)], directed=True))


def test_f_local_examples():
    s = star_graph(5)
    assert is_f_local(s, {0}, 1)
    assert not is_f_local(s, {1, 2}, 1)  # the center hears both
    assert is_f_local(s, {1, 2}, 2)
    k4 = complete_graph(4)
    assert is_f_local(k4, {0}, 1) and not is_f_local(k4, {0, 1}, 1)
    assert is_f_local(k4, range(4), 0)  # nobody is left outside


def test_f_local_sets_matches_brute_force():
    g = cpa_gap_graph()
    expected = [
        frozenset(c)
        for k in range(g.n)
        for c in itertools.combinations(range(g.n), k)
        if is_f_local(g, c, 1)
    ]
    assert list(f_local_sets(g, 1)) == expected
    assert all(0 not in s for s in f_local_sets(g, 1, exclude=[0]))
    assert frozenset() not in set(f_local_sets(g, 1, include_empty=False))


def test_size_guard(monkeypatch):
    big = complete_graph(21)
    with pytest.raises(SizeLimitError):
        max_robustness(big)
    monkeypatch.setenv(ENV_LIMIT, "5")
    with pytest.raises(SizeLimitError):
        is_r_robust(complete_graph(6), 1)
    monkeypatch.setenv(ENV_LIMIT, "abc")
    with pytest.raises(SizeLimitError):
        max_robustness(complete_graph(3))


def test_analyze_reports_errors_per_metric(monkeypatch):
    monkeypatch.setenv(ENV_LIMIT, "4")
    rep = analyze(complete_graph(5))
    assert rep.max_robust_r is None and "max_robust_r" in rep.errors
    assert rep.connectivity == 4 and rep.min_degree == 4


def test_analyze_examples():
    r = analyze(two_clique_graph(10, 1)).to_dict()
    assert (r["max_robust_r"], r["connectivity"], r["min_degree"]) == (1, 5, 5)
    r = analyze(complete_graph(5)).to_dict()
    assert (r["max_robust_r"], r["connectivity"]) == (3, 4)


def test_edge_removal_degrades_gracefully(rng):
    checked = 0
    while checked < 30:
        g = random_graph(int(rng.integers(5, 9)), 0.8, rng)
        r = max_robustness(g)
        if r < 2:
            continue
        k = int(rng.integers(1, r))
        edges = set(g.edges)
        for i in g.nodes:
            drop = rng.permutation(sorted(g.in_neighbors(i)))[:k]
            edges -= {(int(j), i) for j in drop}
        h = DiGraph(g.n, frozenset(edges), directed=True)
        assert is_r_robust(h, r - k)
        checked += 1
