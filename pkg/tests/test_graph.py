from __future__ import annotations

import math

import numpy as np
import pytest

from polyspin import (
    check_expansion_inequalities,
    complete_bipartite,
    even_cycle,
    generate_random_regular_bipartite,
    parse_graph,
    second_eigenvalue,
)
from polyspin.errors import (
    GraphFormatError,
    InfeasibleError,
    InvalidRangeError,
    NoConvergenceError,
    SideViolationError,
)
from polyspin.graph import BipartiteRegularGraph, format_graph
from polyspin.oracle import dense_eigenvalues

from conftest import bfs_distances


# -- generation ------------------------------------------------------------


def test_n3_d3_is_forced_to_k33():
    for seed in (0, 1, 17):
        graph = generate_random_regular_bipartite(3, 3, seed=seed)
        expected = complete_bipartite(3)
        assert np.array_equal(graph.edge_array, expected.edge_array)


def test_generation_infeasible_below_degree():
    with pytest.raises(InfeasibleError):
        generate_random_regular_bipartite(2, 3, seed=1)


def test_generated_graph_invariants():
    graph = generate_random_regular_bipartite(64, 8, seed=1)
    assert graph.n == 64
    assert graph.degree == 8
    assert graph.num_edges == 64 * 8
    assert graph.is_regular
    assert graph.is_connected()
    seen = set()
    for v, nbrs in enumerate(graph.adjacency):
        assert len(nbrs) == 8
        assert len(set(nbrs)) == 8
        for u in nbrs:
            assert (v < 64) != (u < 64)
            seen.add((min(u, v), max(u, v)))
    assert len(seen) == graph.num_edges


def test_generation_reproducible():
    a = generate_random_regular_bipartite(16, 4, seed=99)
    b = generate_random_regular_bipartite(16, 4, seed=99)
    assert np.array_equal(a.edge_array, b.edge_array)
    c = generate_random_regular_bipartite(16, 4, seed=100)
    assert not np.array_equal(a.edge_array, c.edge_array)


# -- host graph -----------------------------------------------------------------


@pytest.mark.parametrize(
    "make",
    [
        lambda: complete_bipartite(3),
        lambda: even_cycle(8),
        lambda: even_cycle(16),
        lambda: generate_random_regular_bipartite(8, 3, seed=4),
        lambda: generate_random_regular_bipartite(10, 3, seed=6),
    ],
)
def test_host_adjacency_matches_bfs_radius_3(make):
    graph = make()
    assert graph.num_vertices <= 20
    host = graph.host_adjacency
    for v in range(graph.num_vertices):
        dist = bfs_distances(graph, v)
        expected = tuple(
            sorted(u for u, d in dist.items() if u != v and d <= 3)
        )
        assert host[v] == expected
    for v in range(graph.num_vertices):
        for u in host[v]:
            assert v in host[u]


# -- spectra ---------------------------------------------------------------------


def test_k33_second_eigenvalue_zero(k33):
    cert = second_eigenvalue(k33)
    assert cert.lam == pytest.approx(0.0, abs=1e-9)


def test_c8_second_eigenvalue(c8):
    cert = second_eigenvalue(c8)
    assert cert.lam == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert cert.residual <= 1e-9


def test_certificate_matches_dense_oracle_small_graphs():
    cases = [
        complete_bipartite(3),
        even_cycle(8),
        even_cycle(16),
        generate_random_regular_bipartite(8, 3, seed=2),
        generate_random_regular_bipartite(10, 3, seed=9),
        generate_random_regular_bipartite(12, 4, seed=3),
        generate_random_regular_bipartite(12, 5, seed=4),
    ]
    for graph in cases:
        assert graph.num_vertices <= 24
        cert = second_eigenvalue(graph)
        spectrum = dense_eigenvalues(graph.adjacency_matrix())
        assert cert.lam == pytest.approx(float(spectrum[1]), abs=1e-8)


def test_no_convergence_when_capped():
    graph = generate_random_regular_bipartite(10, 3, seed=9)
    with pytest.raises(NoConvergenceError):
        second_eigenvalue(graph, max_iterations=3)


def test_random_graphs_meet_two_sqrt_delta():
    bound = 2.0 * math.sqrt(8.0)
    hits = sum(
        second_eigenvalue(generate_random_regular_bipartite(64, 8, seed=1000 + s)).lam
        <= bound
        for s in range(10)
    )
    assert hits >= 9


# -- boundary / edge counting -------------------------------------------------------


def test_boundary_empty_set(k33):
    assert k33.boundary(()) == frozenset()


def test_boundary_k33_single_left(k33):
    assert k33.boundary({0}) == frozenset({3, 4, 5})
    assert k33.closed_set({0}) == frozenset({0, 3, 4, 5})


def test_boundary_c8_adjacent_pair(c8):
    # left vertex 0 and right vertex 4 are adjacent; the path boundary is 2
    assert 4 in c8.neighbors(0)
    assert len(c8.boundary({0, 4})) == 2


def test_edge_count_k33(k33):
    assert k33.edge_count_between({0, 1}, {3, 4}) == 4
    assert k33.edge_count_between(set(), {3, 4}) == 0


def test_edge_count_c8_neighbors(c8):
    v = 4
    nbrs = c8.neighbors(v)
    assert c8.edge_count_between(set(nbrs), {v}) == 2


def test_edge_count_side_violation(k33):
    with pytest.raises(SideViolationError):
        k33.edge_count_between({3}, {4})
    with pytest.raises(SideViolationError):
        k33.edge_count_between({0}, {1})


# -- expansion inequalities ----------------------------------------------------------


def test_k33_mixing_equality(k33):
    report = check_expansion_inequalities(k33, 0.0, trials=200, seed=1)
    assert report.ok
    # lambda = 0 forces e(S0,S1) = Delta |S0||S1| / n with zero slack
    assert report.min_mixing_slack == pytest.approx(0.0, abs=1e-12)


def test_random_graph_inequalities_hold():
    graph = generate_random_regular_bipartite(16, 4, seed=5)
    cert = second_eigenvalue(graph)
    report = check_expansion_inequalities(graph, cert.lam, trials=100, seed=2)
    assert report.ok
    assert report.mixing_checks == 100


def test_vertex_expansion_tight_on_k33(k33):
    # |S|=1, rho=1/3, lambda=0: bound is exactly 3 and K33 achieves it
    rho = 1.0 / 3.0
    bound = 1.0 / (rho + 0.0 * (1 - rho))
    assert bound == pytest.approx(3.0)
    assert len(k33.boundary({0})) == 3


def test_underreported_lambda_is_flagged(k33):
    # an impossible lambda must produce reported violations, not exceptions
    graph = generate_random_regular_bipartite(16, 4, seed=5)
    report = check_expansion_inequalities(graph, 0.0, trials=100, seed=3)
    assert not report.ok


# -- construction and formats ---------------------------------------------------------


def test_class_invariants_enforced():
    with pytest.raises(InvalidRangeError):
        BipartiteRegularGraph(2, [(2,), (3,), (0,), (1,)])  # degree 1 < 3
    # same adjacency is fine as an oracle-only graph
    graph = BipartiteRegularGraph(2, [(2,), (3,), (0,), (1,)], oracle_only=True)
    assert not graph.is_connected()


def test_graph_round_trip(k33, c8):
    assert np.array_equal(
        parse_graph(format_graph(k33)).edge_array, k33.edge_array
    )
    again = parse_graph(format_graph(c8), oracle_only=True)
    assert np.array_equal(again.edge_array, c8.edge_array)


def test_graph_parse_errors():
    with pytest.raises(GraphFormatError, match="line 1"):
        parse_graph("not a header\n")
    with pytest.raises(GraphFormatError, match="line 2"):
        parse_graph("bipartite-regular n 3 delta 3\n0 1\n")  # 1 < n
    with pytest.raises(GraphFormatError, match="degree"):
        parse_graph(format_graph(complete_bipartite(3)).replace("delta 3", "delta 4"))
    text = format_graph(complete_bipartite(3))
    with pytest.raises(GraphFormatError):
        parse_graph(text + "0 3\n")  # duplicate edge
