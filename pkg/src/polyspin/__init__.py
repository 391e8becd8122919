"""Approximate counting and Gibbs sampling for q-spin systems on regular
bipartite expanders, via biclique polymer models and polymer dynamics, with
exact brute-force oracles for desk-scale verification."""

from .dynamics import (
    ChainParams,
    PolymerChain,
    sample_polymer_config,
    uncovered_probability,
)
from .estimator import (
    ApproxResult,
    EstimatorConfig,
    LogEstimate,
    MixtureRecord,
    MixtureTable,
    approximate_Z,
    build_mixture,
    estimate_polymer_Z,
    proof_epsilon,
    spin_fill,
    spin_sample,
    spin_sample_many,
)
from .graph import (
    BipartiteRegularGraph,
    SpectralCertificate,
    check_expansion_inequalities,
    complete_bipartite,
    even_cycle,
    generate_random_regular_bipartite,
    load_graph,
    parse_graph,
    save_graph,
    second_eigenvalue,
    single_edge,
)
from .polymer import (
    Polymer,
    PolymerConfiguration,
    PolymerModel,
    SamplingConditionReport,
    aggregate_size_min_n,
    are_compatible,
    dump_polymers,
)
from .spin_model import (
    Biclique,
    InteractionMatrix,
    PremiseReport,
    check_premises,
    configuration_weight_log,
    enumerate_maximal_bicliques,
    is_biclique,
    load_matrix,
    normalize_matrix,
    parse_matrix,
    save_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxResult",
    "Biclique",
    "BipartiteRegularGraph",
    "ChainParams",
    "EstimatorConfig",
    "InteractionMatrix",
    "LogEstimate",
    "MixtureRecord",
    "MixtureTable",
    "Polymer",
    "PolymerChain",
    "PolymerConfiguration",
    "PolymerModel",
    "PremiseReport",
    "SamplingConditionReport",
    "SpectralCertificate",
    "aggregate_size_min_n",
    "approximate_Z",
    "are_compatible",
    "build_mixture",
    "check_expansion_inequalities",
    "check_premises",
    "complete_bipartite",
    "configuration_weight_log",
    "dump_polymers",
    "enumerate_maximal_bicliques",
    "estimate_polymer_Z",
    "even_cycle",
    "generate_random_regular_bipartite",
    "is_biclique",
    "load_graph",
    "load_matrix",
    "normalize_matrix",
    "parse_graph",
    "parse_matrix",
    "proof_epsilon",
    "sample_polymer_config",
    "save_graph",
    "save_matrix",
    "second_eigenvalue",
    "single_edge",
    "spin_fill",
    "spin_sample",
    "spin_sample_many",
    "uncovered_probability",
]
