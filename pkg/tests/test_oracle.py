from __future__ import annotations

import math

import numpy as np
import pytest

from polyspin import (
    Biclique,
    InteractionMatrix,
    PolymerModel,
    enumerate_maximal_bicliques,
)
from polyspin.errors import ResourceLimitError
from polyspin.logspace import NEG_INF, LogSumAccumulator, log_add, log_sum
from polyspin.oracle import (
    constrained_sum_log,
    decode_configuration,
    dense_eigenvalues,
    encode_configuration,
    exact_log_weights,
    exact_polymer_Z,
    exact_restricted_sums,
    exact_Z,
    ground_state_sum_log,
    iter_compatible_subsets,
)


# -- log-space helpers ------------------------------------------------------


def test_log_add_and_sum():
    assert log_add(math.log(2.0), math.log(3.0)) == pytest.approx(math.log(5.0))
    assert log_add(NEG_INF, 1.5) == 1.5
    assert log_sum([]) == NEG_INF
    assert log_sum([NEG_INF, NEG_INF]) == NEG_INF
    values = np.log(np.arange(1, 50, dtype=float))
    acc = LogSumAccumulator()
    acc.add_array(values)
    assert acc.value == pytest.approx(math.log(np.arange(1, 50).sum()), rel=1e-14)


# -- exact_Z ------------------------------------------------------------------


def test_exact_z_all_ones(k33, all_ones2):
    assert exact_Z(k33, all_ones2) == pytest.approx(6 * math.log(2.0), rel=1e-14)


def test_exact_z_k22_hardcore(k22, hardcore):
    # weight-1 configurations are the independent sets of K22, 7 of them
    assert exact_Z(k22, hardcore) == pytest.approx(math.log(7.0), rel=1e-14)


def test_exact_z_single_edge_ising(edge_graph, ising_third):
    assert exact_Z(edge_graph, ising_third) == pytest.approx(
        math.log(2.0 + 2.0 / 3.0), rel=1e-14
    )


def test_exact_z_nonnegative_whenever_a_one_entry_exists(
    k33, c8, rand43, hardcore, potts3
):
    for graph in (k33, c8, rand43):
        for matrix in (hardcore, potts3):
            assert exact_Z(graph, matrix) >= 0.0


def test_exact_z_budget(k33, potts3):
    with pytest.raises(ResourceLimitError):
        exact_Z(k33, potts3, budget=100)


def test_configuration_codec(k33):
    sigma = decode_configuration(37, 2, 6)
    assert encode_configuration(sigma, 2) == 37
    weights = exact_log_weights(k33, InteractionMatrix([[1, 1], [1, 1]], 0.5))
    assert weights.shape == (64,)
    assert np.all(weights == 0.0)


# -- restricted sums -------------------------------------------------------------


def test_restricted_sums_eps_one_covers_everything(k33, hardcore):
    sums = exact_restricted_sums(k33, hardcore, 1.0)
    assert sums.ln_z_eps == pytest.approx(sums.ln_z, rel=1e-14)


def test_restricted_sums_all_ones_no_overlap(k33, all_ones2):
    sums = exact_restricted_sums(k33, all_ones2, 0.5)
    assert sums.ln_z_overlap == NEG_INF  # single maximal biclique


def test_restricted_sums_hardcore_k33_regression(k33, hardcore):
    # pinned by enumeration: membership needs >= 5 of 6 ground vertices
    sums = exact_restricted_sums(k33, hardcore, 1.0 / 6.0)
    assert sums.ln_z == pytest.approx(math.log(15.0), rel=1e-12)
    assert sums.ln_z_eps == pytest.approx(math.log(15.0), rel=1e-12)
    assert sums.ln_z_hat == pytest.approx(math.log(22.0), rel=1e-12)
    assert sums.ln_z_overlap == pytest.approx(math.log(7.0), rel=1e-12)
    for _, value in sums.per_biclique:
        assert value == pytest.approx(math.log(11.0), rel=1e-12)


def test_restricted_sums_orderings(k33, c8, hardcore, potts3):
    for graph in (k33, c8):
        for matrix in (hardcore, potts3):
            for eps in (0.2, 0.5):
                sums = exact_restricted_sums(graph, matrix, eps)
                assert sums.ln_z_eps <= sums.ln_z + 1e-12
                assert sums.ln_z_eps <= sums.ln_z_hat + 1e-12
                union = sums.ln_z_eps
                for _, value in sums.per_biclique:
                    assert value <= union + 1e-12


# -- exact polymer partition function -----------------------------------------------


def test_exact_polymer_z_no_polymers(k33, all_ones2):
    model = PolymerModel(k33, all_ones2, Biclique((0, 1), (0, 1)), 0.4)
    assert exact_polymer_Z(model) == 0.0


def test_exact_polymer_z_k33_singletons(k33, hardcore):
    model = PolymerModel(k33, hardcore, Biclique((0, 1), (1,)), 0.4)
    w = math.exp(model.weight_log(model.enumerate_allowed(1)[0]))
    assert w == pytest.approx(1.0 / 8.0)
    assert exact_polymer_Z(model, 1) == pytest.approx(math.log(1 + 3 * w), rel=1e-12)


def test_exact_polymer_z_includes_product_terms(c16, hardcore):
    model = PolymerModel(c16, hardcore, Biclique((0, 1), (1,)), 0.3)
    polys = model.enumerate_allowed(1)
    assert len(polys) == 8
    w = math.exp(model.weight_log(polys[0]))
    pairs = sum(
        1
        for i in range(8)
        for j in range(i + 1, 8)
        if model.are_compatible(polys[i], polys[j])
    )
    triples = 16  # 3 pairwise-separated positions on an 8-cycle
    quads = 2
    expected = 1 + 8 * w + pairs * w**2 + triples * w**3 + quads * w**4
    assert exact_polymer_Z(model, 1) == pytest.approx(math.log(expected), rel=1e-12)


def test_polymer_mixture_identity_matches_grounded_sums(k33, rand43, hardcore, potts3):
    # sum over compatible subsets of the grounded restricted sums equals the
    # prefactor-shifted polymer partition function, biclique by biclique
    for graph in (k33, rand43):
        for matrix in (hardcore, potts3):
            for biclique in enumerate_maximal_bicliques(matrix):
                model = PolymerModel(graph, matrix, biclique, 0.4)
                if model.max_size < 1:
                    continue
                polymers = model.enumerate_allowed()
                acc = LogSumAccumulator()
                for indices, _ in iter_compatible_subsets(model, polymers):
                    fixed = {}
                    for i in indices:
                        fixed.update(polymers[i].spin_map())
                    acc.add(ground_state_sum_log(graph, matrix, biclique, fixed))
                prefactor = graph.n * (
                    math.log(len(biclique.b0)) + math.log(len(biclique.b1))
                )
                assert acc.value == pytest.approx(
                    prefactor + exact_polymer_Z(model), abs=1e-10
                )


def test_exact_polymer_budget(k33, potts3):
    model = PolymerModel(k33, potts3, Biclique((0,), (0,)), 0.9)
    with pytest.raises(ResourceLimitError):
        exact_polymer_Z(model, polymer_budget=5)


# -- constrained sums ------------------------------------------------------------------


def test_constrained_sum_log_fixed_everything(k33, hardcore):
    sigma = [1, 1, 1, 0, 1, 1]
    value = constrained_sum_log(k33, hardcore, [(s,) for s in sigma])
    assert value == 0.0  # single weight-1 configuration


# -- dense eigensolver -------------------------------------------------------------------


def test_jacobi_identity():
    assert np.allclose(dense_eigenvalues(np.eye(3)), [1.0, 1.0, 1.0])


def test_jacobi_k33_spectrum(k33):
    eigs = dense_eigenvalues(k33.adjacency_matrix())
    assert np.allclose(eigs, [3.0, 0.0, 0.0, 0.0, 0.0, -3.0], atol=1e-10)


def test_jacobi_c8_spectrum(c8):
    eigs = dense_eigenvalues(c8.adjacency_matrix())
    expected = sorted((2.0 * math.cos(math.pi * k / 4.0) for k in range(8)), reverse=True)
    assert np.allclose(eigs, expected, atol=1e-10)


def test_jacobi_trace_and_numpy_agreement():
    rng = np.random.default_rng(8)
    for n in (4, 9, 17):
        a = rng.standard_normal((n, n))
        a = 0.5 * (a + a.T)
        eigs = dense_eigenvalues(a)
        assert eigs.sum() == pytest.approx(np.trace(a), abs=1e-10)
        assert np.allclose(eigs, np.sort(np.linalg.eigvalsh(a))[::-1], atol=1e-9)


def test_jacobi_rejects_large_or_asymmetric():
    with pytest.raises(ResourceLimitError):
        dense_eigenvalues(np.eye(600))
    from polyspin.errors import InvalidRangeError

    with pytest.raises(InvalidRangeError):
        dense_eigenvalues([[0.0, 1.0], [0.5, 0.0]])
