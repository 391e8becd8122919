"""Reversible heat-bath dynamics on polymer configurations.

One step: pick a vertex v of the region uniformly (among vertices that
admit any polymer), drop the polymer covering v if there is one, then
resample the v-slot from {no polymer} u {allowed polymers through v,
inside the region, of size <= size_cap, compatible with the rest} with
probability proportional to 1 resp. the polymer weight. Each P_v is a
conditional resampling, so the chain is reversible for the size-truncated
polymer Gibbs distribution restricted to the region.

Polymer connectivity and compatibility always refer to G^3 of the full
graph; the region only restricts which vertices polymers may occupy, which
is what makes region partition functions telescope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidRangeError, InvalidSampleCountError
from .logspace import NEG_INF
from .polymer import PolymerConfiguration, PolymerModel

_RNG_BUFFER = 4096


@dataclass(frozen=True)
class ChainParams:
    """Knobs for the polymer chain.

    size_cap truncates polymer generation (exact when >= floor(2 eps n));
    steps_per_sample spaces retained samples when an estimator thins a
    trajectory; burn_in is the per-sample run length for independent
    draws. None picks defaults derived from the region size.
    """

    size_cap: int = 4
    steps_per_sample: int | None = None
    burn_in: int | None = None
    mixing_constant: float = 10.0

    def __post_init__(self):
        if self.size_cap < 1:
            raise InvalidRangeError("size_cap must be >= 1")
        if self.mixing_constant <= 0:
            raise InvalidRangeError("mixing_constant must be positive")


class CandidateTable:
    """All sampleable polymers of a model up to a size cap, with bitmasks.

    blocks[i] covers V_gamma and its G^3 neighborhood: polymer j is
    compatible with i iff mask[j] & blocks[i] == 0. Zero-weight polymers
    (including weights that underflow exp) are omitted; the heat bath could
    never select them.
    """

    def __init__(self, model: PolymerModel, size_cap: int):
        polymers = model.enumerate_allowed(size_cap)
        host = model.graph.host_adjacency
        self.polymers = []
        self.masks: list[int] = []
        self.blocks: list[int] = []
        self.weights: list[float] = []
        self.log_weights: list[float] = []
        by_vertex: dict[int, list[int]] = {v: [] for v in range(model.graph.num_vertices)}
        for poly in polymers:
            lw = model.weight_log(poly)
            if lw == NEG_INF:
                continue
            w = math.exp(lw)
            if w <= 0.0:
                continue
            mask = 0
            block = 0
            for v in poly.vertices:
                mask |= 1 << v
                block |= 1 << v
                for u in host[v]:
                    block |= 1 << u
            idx = len(self.polymers)
            self.polymers.append(poly)
            self.masks.append(mask)
            self.blocks.append(block)
            self.weights.append(w)
            self.log_weights.append(lw)
            for v in poly.vertices:
                by_vertex[v].append(idx)
        self.by_vertex = by_vertex

    def __len__(self) -> int:
        return len(self.polymers)


def candidate_table(model: PolymerModel, size_cap: int) -> CandidateTable:
    """Table cache lives on the (immutable) model."""
    table = model._tables.get(size_cap)
    if table is None:
        table = CandidateTable(model, size_cap)
        model._tables[size_cap] = table
    return table


class PolymerChain:
    """A single replica of the heat-bath chain, confined to one worker.

    Deterministic given (seed, replica) and the sequence of steps; replicas
    draw from counter-based Philox streams keyed by (seed, replica), so
    concurrent replicas are reproducible independent of scheduling.
    """

    def __init__(
        self,
        model: PolymerModel,
        params: ChainParams,
        *,
        region=None,
        seed: int = 0,
        replica: int = 0,
    ):
        self.model = model
        self.params = params
        self.seed = seed
        self.replica = replica
        self.region = frozenset(
            range(model.graph.num_vertices) if region is None else region
        )
        for v in self.region:
            if not 0 <= v < model.graph.num_vertices:
                raise InvalidRangeError(f"region vertex {v} out of range")
        region_mask = 0
        for v in self.region:
            region_mask |= 1 << v
        table = candidate_table(model, params.size_cap)
        self._table = table
        self._cands: dict[int, list[tuple[int, float, int]]] = {}
        active = []
        for v in sorted(self.region):
            opts = [
                (table.masks[i], table.weights[i], i)
                for i in table.by_vertex[v]
                if table.masks[i] & ~region_mask == 0
            ]
            if opts:
                active.append(v)
                self._cands[v] = opts
        self._active = active
        self._current: list[int] = []  # table indices of present polymers
        self.steps_taken = 0
        self._rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, replica]))
        )
        self._ints = np.empty(0, dtype=np.int64)
        self._unis = np.empty(0)
        self._pos = 0

    def _refill(self) -> None:
        nact = len(self._active)
        self._ints = self._rng.integers(0, nact, size=_RNG_BUFFER)
        self._unis = self._rng.random(_RNG_BUFFER)
        self._pos = 0

    def step(self) -> None:
        self.steps_taken += 1
        active = self._active
        if not active:
            return
        if self._pos >= len(self._ints):
            self._refill()
        v = active[self._ints[self._pos]]
        u = self._unis[self._pos]
        self._pos += 1

        table = self._table
        masks = table.masks
        blocks = table.blocks  # block zone already contains the vertex mask
        vbit = 1 << v
        kept = [i for i in self._current if not masks[i] & vbit]
        blocked = 0
        for i in kept:
            blocked |= blocks[i]
        options = [(w, i) for (m, w, i) in self._cands[v] if not m & blocked]
        total = 1.0
        for w, _ in options:
            total += w
        r = u * total
        if r >= 1.0:
            r -= 1.0
            chosen = options[-1][1]
            for w, i in options:
                if r < w:
                    chosen = i
                    break
                r -= w
            kept.append(chosen)
        self._current = kept

    def run(self, steps: int, diagnostics=None) -> None:
        if diagnostics is None:
            for _ in range(steps):
                self.step()
            return
        for _ in range(steps):
            self.step()
            if self.steps_taken % 1000 == 0:
                diagnostics.write(
                    f"{self.steps_taken}\t{len(self._current)}\t"
                    f"{self.covered_count()}\t{self.log_weight():.12g}\n"
                )

    # -- state inspection ---------------------------------------------------

    @property
    def active_vertices(self) -> tuple[int, ...]:
        """Region vertices that admit at least one sampleable polymer."""
        return tuple(self._active)

    def can_cover(self, v: int) -> bool:
        """True iff some region polymer contains v (else p_v = 1 exactly)."""
        return v in self._cands

    def covered(self, v: int) -> bool:
        vbit = 1 << v
        return any(self._table.masks[i] & vbit for i in self._current)

    def covered_count(self) -> int:
        return sum(self._table.polymers[i].size for i in self._current)

    def log_weight(self) -> float:
        return sum(self._table.log_weights[i] for i in self._current)

    def current_polymers(self):
        return tuple(self._table.polymers[i] for i in sorted(self._current))

    def config(self) -> PolymerConfiguration:
        return PolymerConfiguration(self.current_polymers())


def default_mixing_steps(params: ChainParams, region_size: int, eps_sample: float) -> int:
    """ceil(C * |region| * ln(|region| / eps_sample)), at least 1."""
    if region_size < 1:
        return 0
    return max(
        1,
        math.ceil(
            params.mixing_constant * region_size * math.log(region_size / eps_sample)
        ),
    )


def sample_polymer_config(
    model: PolymerModel,
    params: ChainParams,
    eps_sample: float,
    seed: int,
    *,
    region=None,
    replica: int = 0,
) -> PolymerConfiguration:
    """Approximate sample from the size-truncated polymer Gibbs distribution.

    Runs the chain from the empty configuration for
    ceil(C |region| ln(|region|/eps_sample)) steps and returns the final
    state. The target is mu truncated to polymers of size <= size_cap; the
    neglected tail is the caller's responsibility (exact when size_cap =
    floor(2 eps n)).
    """
    if not (0.0 < eps_sample < 1.0):
        raise InvalidRangeError(f"eps_sample must lie in (0,1), got {eps_sample}")
    chain = PolymerChain(model, params, region=region, seed=seed, replica=replica)
    chain.run(default_mixing_steps(params, len(chain.region), eps_sample))
    return chain.config()


def uncovered_probability(
    model: PolymerModel,
    params: ChainParams,
    v: int,
    m: int,
    seed: int,
    *,
    region=None,
) -> float:
    """Empirical frequency of {v uncovered} over m independent chain samples.

    This estimates Z(region minus v) / Z(region): polymers of the region
    avoiding v are exactly the polymers of the region without v. Each
    sample is a fresh replica run for params.burn_in steps (default: the
    mixing-step formula at accuracy 0.01). Returns 1.0 exactly when no
    region polymer can contain v.
    """
    if m < 1:
        raise InvalidSampleCountError(f"need m >= 1 samples, got {m}")
    probe = PolymerChain(model, params, region=region, seed=seed, replica=0)
    if v not in probe.region:
        raise InvalidRangeError(f"vertex {v} is not in the region")
    if not probe.can_cover(v):
        return 1.0
    burn = params.burn_in
    if burn is None:
        burn = default_mixing_steps(params, len(probe.region), 0.01)
    hits = 0
    for r in range(m):
        chain = PolymerChain(model, params, region=region, seed=seed, replica=r)
        chain.run(burn)
        if not chain.covered(v):
            hits += 1
    return hits / m
