from __future__ import annotations

import math

import numpy as np
import pytest

from polyspin import (
    Biclique,
    ChainParams,
    PolymerChain,
    PolymerModel,
    sample_polymer_config,
    uncovered_probability,
)
from polyspin.errors import InvalidRangeError, InvalidSampleCountError
from polyspin.oracle import (
    exact_chain_analysis,
    exact_polymer_distribution,
)


@pytest.fixture
def k33_model(k33, hardcore) -> PolymerModel:
    return PolymerModel(k33, hardcore, Biclique((0, 1), (1,)), 0.4)


@pytest.fixture
def empty_model(k33, all_ones2) -> PolymerModel:
    return PolymerModel(k33, all_ones2, Biclique((0, 1), (0, 1)), 0.4)


# -- single steps ------------------------------------------------------------


def test_no_polymers_means_empty_forever(empty_model):
    chain = PolymerChain(empty_model, ChainParams(size_cap=1), seed=3)
    chain.run(500)
    assert chain.current_polymers() == ()
    assert chain.steps_taken == 500


def test_left_vertices_admit_no_polymers(k33_model):
    # ground set on the left is the whole spin space, so only right
    # vertices are ever proposed
    chain = PolymerChain(k33_model, ChainParams(size_cap=1), seed=3)
    assert chain.active_vertices == (3, 4, 5)
    assert not chain.can_cover(0)


def test_region_restricts_membership(k33_model):
    chain = PolymerChain(
        k33_model, ChainParams(size_cap=2), region=range(4), seed=0
    )
    # only vertex 3 on the right is available; pairs exceed the region
    assert chain.active_vertices == (3,)
    chain.run(200)
    for poly in chain.current_polymers():
        assert set(poly.vertices) <= {3}


def test_chain_reproducible(k33_model):
    params = ChainParams(size_cap=2)
    a = PolymerChain(k33_model, params, seed=11, replica=5)
    b = PolymerChain(k33_model, params, seed=11, replica=5)
    a.run(997)
    b.run(997)
    assert a.current_polymers() == b.current_polymers()
    c = PolymerChain(k33_model, params, seed=11, replica=6)
    c.run(997)
    # different replica id gives an independent stream
    assert c.steps_taken == 997


# -- exact transition-matrix checks ----------------------------------------------


@pytest.mark.parametrize("cap", [1, 2])
def test_detailed_balance_and_stationarity(k33_model, cap):
    analysis = exact_chain_analysis(k33_model, ChainParams(size_cap=cap))
    assert analysis.detailed_balance_violation <= 1e-12
    assert analysis.stationarity_violation <= 1e-10
    assert analysis.spectral_gap is not None and analysis.spectral_gap > 0.0


def test_state_space_size_cap2(k33_model):
    # 3 singletons + 3 connected pairs, all mutually incompatible
    analysis = exact_chain_analysis(k33_model, ChainParams(size_cap=2))
    assert analysis.num_states == 7


def test_detailed_balance_three_spins(rand43, potts3):
    model = PolymerModel(rand43, potts3, Biclique((0,), (0,)), 0.4)
    analysis = exact_chain_analysis(model, ChainParams(size_cap=2))
    assert analysis.num_states <= 200
    assert analysis.detailed_balance_violation <= 1e-12
    assert analysis.stationarity_violation <= 1e-10


def test_removal_paths_have_positive_probability(k33_model):
    # irreducibility: each reachable state walks to the empty configuration
    # by dropping one polymer at a time, every step with positive probability
    analysis = exact_chain_analysis(k33_model, ChainParams(size_cap=2))
    index = {state: i for i, state in enumerate(analysis.states)}
    for state in analysis.states:
        current = state
        while current:
            smaller = current[:-1]
            assert analysis.transition[index[current], index[smaller]] > 0.0
            current = smaller


def test_empty_model_analysis(empty_model):
    analysis = exact_chain_analysis(empty_model, ChainParams(size_cap=1))
    assert analysis.num_states == 1
    assert analysis.detailed_balance_violation == 0.0


# -- sampling --------------------------------------------------------------------


def test_sample_polymer_config_empty_model(empty_model):
    config = sample_polymer_config(empty_model, ChainParams(size_cap=1), 0.1, seed=4)
    assert len(config) == 0


def test_sample_reproducible(k33_model):
    params = ChainParams(size_cap=2)
    a = sample_polymer_config(k33_model, params, 0.05, seed=9)
    b = sample_polymer_config(k33_model, params, 0.05, seed=9)
    assert a == b


def test_sampled_distribution_matches_enumeration(k33_model):
    params = ChainParams(size_cap=1, mixing_constant=2.0)
    configs, probs = exact_polymer_distribution(k33_model, 1)
    key = {tuple(c): i for i, c in enumerate(configs)}
    draws = 50_000
    counts = np.zeros(len(configs))
    for r in range(draws):
        chain = PolymerChain(k33_model, params, seed=21, replica=r)
        chain.run(60)
        counts[key[chain.current_polymers()]] += 1
    tv = 0.5 * float(np.abs(counts / draws - probs).sum())
    assert tv <= 0.02


def test_ergodic_average_matches_enumeration(k33_model):
    # long-run mean of the polymer count against the exact expectation
    params = ChainParams(size_cap=2)
    configs, probs = exact_polymer_distribution(k33_model, 2)
    expect = float(sum(p * len(c) for c, p in zip(configs, probs)))
    chain = PolymerChain(k33_model, params, seed=2)
    chain.run(2000)
    total = 0
    steps = 60_000
    for _ in range(steps):
        chain.step()
        total += len(chain.current_polymers())
    mean = total / steps
    # 3 standard errors with a generous correlation allowance
    var = float(sum(p * (len(c) - expect) ** 2 for c, p in zip(configs, probs)))
    stderr = math.sqrt(var / steps) * 6.0
    assert abs(mean - expect) <= 3.0 * stderr + 1e-3


# -- uncovered probability ---------------------------------------------------------


def test_uncovered_probability_no_polymers(empty_model):
    p = uncovered_probability(empty_model, ChainParams(size_cap=1), 0, 10, seed=1)
    assert p == 1.0


def test_uncovered_probability_matches_exact(k33_model):
    params = ChainParams(size_cap=1, burn_in=80)
    configs, probs = exact_polymer_distribution(k33_model, 1)
    exact = float(
        sum(p for c, p in zip(configs, probs) if all(3 not in poly.vertices for poly in c))
    )
    assert exact == pytest.approx(10.0 / 11.0, abs=1e-12)
    m = 10_000
    est = uncovered_probability(k33_model, params, 3, m, seed=6)
    stderr = math.sqrt(exact * (1 - exact) / m)
    assert abs(est - exact) <= 3.0 * stderr + 0.003  # burn-in bias allowance


def test_uncovered_probability_argument_validation(k33_model):
    with pytest.raises(InvalidSampleCountError):
        uncovered_probability(k33_model, ChainParams(size_cap=1), 3, 0, seed=1)
    with pytest.raises(InvalidRangeError):
        uncovered_probability(
            k33_model, ChainParams(size_cap=1), 5, 10, seed=1, region=range(3)
        )


def test_chain_params_validation():
    with pytest.raises(InvalidRangeError):
        ChainParams(size_cap=0)
    with pytest.raises(InvalidRangeError):
        ChainParams(size_cap=1, mixing_constant=0.0)


def test_diagnostics_stream(k33_model, tmp_path):
    params = ChainParams(size_cap=1)
    chain = PolymerChain(k33_model, params, seed=1)
    out = tmp_path / "diag.tsv"
    with open(out, "w") as fh:
        chain.run(2500, diagnostics=fh)
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 2
    step, npoly, covered, lw = lines[0].split("\t")
    assert step == "1000"
    assert int(npoly) >= 0 and int(covered) >= 0
    float(lw)
