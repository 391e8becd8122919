"""Top-level approximation and sampling algorithms.

Per maximal biclique, ln Z of the polymer model is estimated by vertex
telescoping: with regions L_0 = {} through L_{2n} = V, each ratio
Z(L_{i-1})/Z(L_i) equals the probability that vertex i-1 is uncovered
under the region-L_i polymer Gibbs measure, estimated from chain samples.
The per-biclique estimates combine into the mixture
    sum over (B_0,B_1) of |B_0|^n |B_1|^n * Z^{B_0,B_1},
everything in log-space. Configuration sampling draws a biclique from the
mixture, a polymer configuration from its chain, and fills the remaining
vertices: ground spins uniformly off the boundary, and boundary vertices u
with P(j) proportional to prod of H[j, spin of covered neighbors].
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .dynamics import ChainParams, PolymerChain, default_mixing_steps
from .errors import (
    DegenerateRatioError,
    InvalidAccuracyError,
    InvalidRangeError,
    PremisesUnmetError,
    ZeroNormalizerError,
)
from .graph import BipartiteRegularGraph, second_eigenvalue
from .logspace import LogSumAccumulator
from .polymer import PolymerModel
from .spin_model import (
    Biclique,
    InteractionMatrix,
    check_premises,
    enumerate_maximal_bicliques,
)


@dataclass(frozen=True)
class LogEstimate:
    """A partition-function value carried as a natural log."""

    ln_value: float
    rel_err_target: float
    confidence: float


@dataclass(frozen=True)
class MixtureRecord:
    biclique: Biclique
    ln_prefactor: float  # n ln|B_0| + n ln|B_1|
    ln_polymer_z: float


@dataclass(frozen=True)
class MixtureTable:
    records: tuple[MixtureRecord, ...]
    ln_total: float
    confidence: float

    def biclique_log_masses(self) -> np.ndarray:
        return np.array([r.ln_prefactor + r.ln_polymer_z for r in self.records])


@dataclass(frozen=True)
class EstimatorConfig:
    """Tunable constants; defaults follow the analysis-backed schedule.

    Lab runs at desk scale usually override inner_fraction/median_runs
    (mode="lab" does this automatically) because the worst-case error
    split is far more sampling than small instances need.
    """

    sample_factor: float = 8.0  # c in m_i = ceil(c n / eps^2)
    size_cap: int | None = None  # None -> floor(2 eps n), the exact truncation
    mixing_constant: float = 10.0
    steps_per_sample: int | None = None  # None -> one sweep of the active region
    burn_in: int | None = None
    inner_fraction: float | None = None  # per-biclique accuracy = fraction * eps*
    median_runs: int | None = None  # None -> schedule from the failure budget
    brute_force_budget: int = 1 << 24  # 0 disables the exact fallback entirely
    eps_override: float | None = None
    max_ratio_retries: int = 3
    threads: int = 1

    def chain_params(self, model: PolymerModel) -> ChainParams:
        cap = model.max_size if self.size_cap is None else min(self.size_cap, model.max_size)
        return ChainParams(
            size_cap=max(cap, 1),
            steps_per_sample=self.steps_per_sample,
            burn_in=self.burn_in,
            mixing_constant=self.mixing_constant,
        )


@dataclass(frozen=True)
class ApproxResult:
    estimate: LogEstimate
    mode: str  # "exact" | "lab" | "strict"
    bicliques: int
    eps: float | None
    table: MixtureTable | None
    warnings: tuple[str, ...] = field(default=())

    @property
    def ln_value(self) -> float:
        return self.estimate.ln_value


def _subseed(seed: int, *path: int) -> int:
    entropy = [seed & 0xFFFFFFFFFFFFFFFF, *path]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def estimate_polymer_Z(
    model: PolymerModel,
    params: ChainParams,
    eps_star: float,
    seed: int,
    *,
    sample_factor: float = 8.0,
    median_runs: int = 1,
    max_ratio_retries: int = 3,
) -> LogEstimate:
    """ln Z of one polymer model via the telescoping ratio product.

    ln Z = -sum over i of ln p_i, where p_i is the uncovered probability of
    vertex i-1 in region {0..i-1}, each estimated from
    m = ceil(sample_factor * n / eps_star^2) thinned chain samples.
    Vertices that no region polymer can cover contribute p_i = 1 exactly.
    A ratio estimate of 0 is retried with 4x the samples before raising.
    Median-of-k amplification over independent runs via median_runs.
    """
    if not (0.0 < eps_star < 1.0):
        raise InvalidAccuracyError(f"eps_star must lie in (0,1), got {eps_star}")
    if median_runs < 1:
        raise InvalidRangeError("median_runs must be >= 1")
    m = math.ceil(sample_factor * model.graph.n / eps_star**2)
    values = [
        _telescope(model, params, seed, m, run, max_ratio_retries)
        for run in range(median_runs)
    ]
    ln_value = float(np.median(values))
    # Hoeffding on the median is vacuous for small k; never report below
    # the single-run success probability
    confidence = max(0.75, 1.0 - math.exp(-median_runs / 8.0))
    return LogEstimate(ln_value=ln_value, rel_err_target=eps_star, confidence=confidence)


def _telescope(
    model: PolymerModel,
    params: ChainParams,
    seed: int,
    m: int,
    run: int,
    max_ratio_retries: int,
) -> float:
    num = model.graph.num_vertices
    ln_z = 0.0
    for i in range(1, num + 1):
        v = i - 1
        region = range(i)
        p = _uncovered_ratio(model, params, region, v, m, seed, run, i, max_ratio_retries)
        ln_z -= math.log(p)
    return ln_z


def _uncovered_ratio(
    model, params, region, v, m, seed, run, region_id, max_ratio_retries
) -> float:
    samples = m
    for attempt in range(max_ratio_retries + 1):
        replica = (run * 4096 + region_id) * 16 + attempt
        chain = PolymerChain(model, params, region=region, seed=seed, replica=replica)
        if not chain.can_cover(v):
            return 1.0
        spacing = params.steps_per_sample or max(1, len(chain.active_vertices))
        burn = params.burn_in
        if burn is None:
            burn = default_mixing_steps(params, len(chain.region), 1e-3)
        chain.run(burn)
        hits = 0
        for _ in range(samples):
            chain.run(spacing)
            if not chain.covered(v):
                hits += 1
        if hits:
            return hits / samples
        samples *= 4
    raise DegenerateRatioError(
        f"uncovered frequency stayed 0 for vertex {v} after "
        f"{max_ratio_retries + 1} attempts"
    )


def _median_schedule(eps_star: float, num_bicliques: int) -> int:
    """Odd k with median failure probability <= eps_star/(16 * #bicliques)."""
    eta = eps_star / (16.0 * max(1, num_bicliques))
    k = max(1, math.ceil(8.0 * math.log(1.0 / eta)))
    return k if k % 2 else k + 1


def build_mixture(
    graph: BipartiteRegularGraph,
    matrix: InteractionMatrix,
    eps: float,
    eps_star: float,
    seed: int,
    *,
    config: EstimatorConfig | None = None,
    inner_fraction: float = 0.125,
    median_runs: int | None = None,
) -> MixtureTable:
    """Per-maximal-biclique estimates assembled by log-sum-exp.

    Each biclique is estimated at accuracy inner_fraction * eps_star with
    median amplification sized so the union failure mass stays below
    eps_star/16 (overridable). A biclique whose model admits no polymers
    contributes ln Z = 0 exactly.
    """
    if not (0.0 < eps_star < 1.0):
        raise InvalidAccuracyError(f"eps_star must lie in (0,1), got {eps_star}")
    config = config or EstimatorConfig()
    bicliques = enumerate_maximal_bicliques(matrix)
    runs = median_runs if median_runs is not None else _median_schedule(eps_star, len(bicliques))
    inner_eps = min(0.999, inner_fraction * eps_star)
    n = graph.n

    def one(item):
        b_idx, biclique = item
        model = PolymerModel(graph, matrix, biclique, eps)
        prefactor = n * (math.log(len(biclique.b0)) + math.log(len(biclique.b1)))
        params = config.chain_params(model)
        if model.max_size < 1 or not model.active_vertices:
            est = LogEstimate(0.0, inner_eps, 1.0)
        else:
            est = estimate_polymer_Z(
                model,
                params,
                inner_eps,
                _subseed(seed, b_idx),
                sample_factor=config.sample_factor,
                median_runs=runs,
                max_ratio_retries=config.max_ratio_retries,
            )
        return MixtureRecord(biclique, prefactor, est.ln_value), est.confidence

    items = list(enumerate(bicliques))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(one, items))
    else:
        results = [one(item) for item in items]

    records = tuple(rec for rec, _ in results)
    acc = LogSumAccumulator()
    for rec in records:
        acc.add(rec.ln_prefactor + rec.ln_polymer_z)
    confidence = 1.0
    for _, conf in results:
        confidence *= conf
    return MixtureTable(records=records, ln_total=acc.value, confidence=confidence)


# Hard cap for exactness forced by the eps-star condition alone. Small n
# satisfies eps* < 9 e^{-n/(4q)} for EVERY eps* (the threshold exceeds 1 up
# to n ~ 9q), so without a cap mid-size graphs would enumerate for hours;
# past the cap the run proceeds on the polymer path with a warning.
_EPS_EXACT_CAP = 1 << 26


def _exact_fallback(graph, matrix, eps_star, budget) -> bool:
    if budget <= 0:
        return False
    total = matrix.q ** graph.num_vertices
    if total <= budget:
        return True
    if total > _EPS_EXACT_CAP:
        return False
    return eps_star < 9.0 * math.exp(-graph.n / (4.0 * matrix.q))


def proof_epsilon(matrix: InteractionMatrix, degree: int) -> float:
    """The closeness level the analysis fixes: (1-delta)/(50 q ln(q Delta))."""
    return (1.0 - matrix.delta) / (50.0 * matrix.q * math.log(matrix.q * degree))


def approximate_Z(
    graph: BipartiteRegularGraph,
    matrix: InteractionMatrix,
    eps_star: float,
    seed: int,
    *,
    mode: str = "lab",
    config: EstimatorConfig | None = None,
    lam: float | None = None,
) -> ApproxResult:
    """Estimate ln Z_{G,H} to relative accuracy eps_star.

    Small instances (q^{2n} within the brute-force budget, or eps_star
    below 9 e^{-n/(4q)}) are answered exactly. Otherwise the polymer
    mixture runs at the analysis epsilon (or config.eps_override). Strict
    mode certifies lambda(G), refuses when the degree/gap premises fail,
    and uses the worst-case error split; lab mode proceeds with relaxed
    inner budgets and records that no guarantee is claimed.
    """
    if not (0.0 < eps_star < 1.0):
        raise InvalidAccuracyError(f"eps_star must lie in (0,1), got {eps_star}")
    if mode not in ("lab", "strict"):
        raise InvalidRangeError(f"mode must be 'lab' or 'strict', got {mode!r}")
    config = config or EstimatorConfig()

    if _exact_fallback(graph, matrix, eps_star, config.brute_force_budget):
        # the eps-star condition can force exactness on its own; the
        # enumeration is then poly(1/eps*) work and must be allowed to run
        needed = matrix.q**graph.num_vertices
        ln = oracle.exact_Z(
            graph, matrix, budget=max(config.brute_force_budget, needed)
        )
        return ApproxResult(
            estimate=LogEstimate(ln, eps_star, 1.0),
            mode="exact",
            bicliques=len(enumerate_maximal_bicliques(matrix)),
            eps=None,
            table=None,
        )

    warnings: list[str] = []
    if eps_star < 9.0 * math.exp(-graph.n / (4.0 * matrix.q)):
        warnings.append(
            "accuracy target is below the small-instance threshold but the "
            "exact path exceeds its cap; polymer estimate carries no bound"
        )
    eps = config.eps_override
    if eps is None:
        eps = proof_epsilon(matrix, graph.degree)
    if mode == "strict":
        cert = second_eigenvalue(graph)
        lam_used = max(cert.lam, 1e-300)  # lambda=0 means perfect expansion
        if lam is not None:
            warnings.append(f"declared lambda={lam:.6g}, certified {cert.lam:.6g}")
        report = check_premises(matrix, graph.degree, lam_used)
        if not report.all_ok:
            raise PremisesUnmetError("; ".join(report.details))
        inner_fraction = config.inner_fraction if config.inner_fraction is not None else 0.125
        median_runs = config.median_runs
    else:
        warnings.append("lab mode: premises unchecked, no accuracy guarantee claimed")
        inner_fraction = config.inner_fraction if config.inner_fraction is not None else 1.0
        median_runs = config.median_runs if config.median_runs is not None else 1

    table = build_mixture(
        graph,
        matrix,
        eps,
        eps_star,
        seed,
        config=config,
        inner_fraction=inner_fraction,
        median_runs=median_runs,
    )
    return ApproxResult(
        estimate=LogEstimate(table.ln_total, eps_star, table.confidence),
        mode=mode,
        bicliques=len(table.records),
        eps=eps,
        table=table,
        warnings=tuple(warnings),
    )


# -- configuration sampling ------------------------------------------------------


def spin_fill(graph, matrix, biclique: Biclique, polymers, rng) -> np.ndarray:
    """Complete a polymer configuration to a full spin configuration.

    Covered vertices keep their polymer spins; vertices away from the
    covered region draw uniformly from their ground set; boundary vertices
    u on side i take j in B_i with probability proportional to the product
    of H[j, spin] over covered neighbors (normalizer F_u).
    """
    n = graph.n
    sigma = np.full(graph.num_vertices, -1, dtype=np.int64)
    spin_map: dict[int, int] = {}
    for poly in polymers:
        spin_map.update(poly.spin_map())
    for v, s in spin_map.items():
        sigma[v] = s
    boundary = sorted(graph.boundary(spin_map.keys()))
    h = matrix.entries
    for u in boundary:
        side = graph.side(u)
        ground = list(biclique.side(side))
        adjacent = [spin_map[v] for v in graph.neighbors(u) if v in spin_map]
        weights = np.prod(h[np.ix_(ground, adjacent)], axis=1)
        total = float(weights.sum())
        if total <= 0.0:
            raise ZeroNormalizerError(f"boundary vertex {u} has F_u = 0")
        r = rng.random() * total
        pick = len(ground) - 1
        acc = 0.0
        for k, w in enumerate(weights):
            acc += w
            if r < acc:
                pick = k
                break
        sigma[u] = ground[pick]
    free = np.flatnonzero(sigma < 0)
    for side in (0, 1):
        side_free = free[(free >= n) == bool(side)]
        if side_free.size:
            ground = np.asarray(biclique.side(side), dtype=np.int64)
            sigma[side_free] = ground[rng.integers(0, ground.size, size=side_free.size)]
    return sigma


def spin_sample_many(
    graph: BipartiteRegularGraph,
    matrix: InteractionMatrix,
    eps_star: float,
    seed: int,
    count: int,
    *,
    mode: str = "lab",
    config: EstimatorConfig | None = None,
) -> np.ndarray:
    """Draw `count` approximate Gibbs configurations; shape (count, 2n).

    Pipeline per draw: biclique from the estimated mixture, polymer
    configuration from its chain at accuracy eps_star/6, then spin_fill.
    Exact inverse-CDF sampling under the same fallback conditions as
    approximate_Z.
    """
    if not (0.0 < eps_star < 1.0):
        raise InvalidAccuracyError(f"eps_star must lie in (0,1), got {eps_star}")
    if count < 0:
        raise InvalidRangeError("count must be >= 0")
    config = config or EstimatorConfig()
    num = graph.num_vertices
    if count == 0:
        return np.empty((0, num), dtype=np.int64)

    if _exact_fallback(graph, matrix, eps_star, config.brute_force_budget):
        needed = matrix.q**num
        log_w = oracle.exact_log_weights(
            graph, matrix, budget=max(config.brute_force_budget, needed)
        )
        probs = np.exp(log_w - log_w.max())
        cdf = np.cumsum(probs)
        cdf /= cdf[-1]
        rng = np.random.default_rng(_subseed(seed, 1))
        picks = np.searchsorted(cdf, rng.random(count), side="right")
        return np.stack(
            [oracle.decode_configuration(int(i), matrix.q, num) for i in picks]
        )

    result = approximate_Z(graph, matrix, eps_star, seed, mode=mode, config=config)
    table = result.table
    masses = table.biclique_log_masses()
    probs = np.exp(masses - masses.max())
    probs /= probs.sum()
    cdf = np.cumsum(probs)
    models = {}
    rng = np.random.default_rng(_subseed(seed, 2))
    out = np.empty((count, num), dtype=np.int64)
    for d in range(count):
        b_idx = int(np.searchsorted(cdf, rng.random(), side="right"))
        b_idx = min(b_idx, len(table.records) - 1)
        record = table.records[b_idx]
        if b_idx not in models:
            models[b_idx] = PolymerModel(graph, matrix, record.biclique, result.eps)
        model = models[b_idx]
        if model.max_size < 1 or not model.active_vertices:
            polymers = ()
        else:
            params = config.chain_params(model)
            chain = PolymerChain(
                model, params, seed=_subseed(seed, 3, b_idx), replica=d
            )
            chain.run(
                default_mixing_steps(params, len(chain.region), eps_star / 6.0)
            )
            polymers = chain.current_polymers()
        out[d] = spin_fill(graph, matrix, record.biclique, polymers, rng)
    return out


def spin_sample(
    graph: BipartiteRegularGraph,
    matrix: InteractionMatrix,
    eps_star: float,
    seed: int,
    *,
    mode: str = "lab",
    config: EstimatorConfig | None = None,
) -> np.ndarray:
    """One approximate Gibbs configuration (see spin_sample_many)."""
    return spin_sample_many(graph, matrix, eps_star, seed, 1, mode=mode, config=config)[0]
