"""Exact brute-force references for small instances.

Deliberately naive: full enumeration over configuration space, exhaustive
DFS over compatible polymer sets, explicit transition matrices, and a
hand-rolled Jacobi eigensolver. Everything here is the independent side of
a dual-route check, so none of it may share shortcuts with the estimators
it verifies. All sums run in log-space through max-shifted accumulators in
a fixed canonical order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ChainParams, PolymerChain
from .errors import InvalidRangeError, NoConvergenceError, ResourceLimitError
from .logspace import NEG_INF, LogSumAccumulator
from .polymer import Polymer, PolymerModel
from .spin_model import Biclique, InteractionMatrix, enumerate_maximal_bicliques

DEFAULT_CONFIG_BUDGET = 1 << 24
DEFAULT_POLYMER_BUDGET = 5000
_BLOCK = 1 << 14


def _assignment_blocks(allowed, block_size=_BLOCK):
    """Yield (offset, spins) blocks over the product of per-vertex spin lists.

    Canonical mixed-radix order with vertex 0 most significant, matching
    itertools.product over the allowed lists.
    """
    sizes = [len(a) for a in allowed]
    total = 1
    for s in sizes:
        total *= s
    if total == 0:
        return
    lookup = [np.asarray(a, dtype=np.int64) for a in allowed]
    num = len(allowed)
    for start in range(0, total, block_size):
        idx = np.arange(start, min(start + block_size, total), dtype=np.int64)
        spins = np.empty((idx.size, num), dtype=np.int64)
        rem = idx.copy()
        for pos in range(num - 1, -1, -1):
            spins[:, pos] = lookup[pos][rem % sizes[pos]]
            rem //= sizes[pos]
        yield start, spins


def _block_log_weights(graph, matrix: InteractionMatrix, spins: np.ndarray) -> np.ndarray:
    edges = graph.edge_array
    if edges.shape[0] == 0:
        return np.zeros(spins.shape[0])
    logh = matrix.log_entries
    return logh[spins[:, edges[:, 0]], spins[:, edges[:, 1]]].sum(axis=1)


def constrained_sum_log(graph, matrix: InteractionMatrix, allowed, *, budget=DEFAULT_CONFIG_BUDGET) -> float:
    """ln sum of w over all configurations drawing spin(v) from allowed[v]."""
    total = 1
    for a in allowed:
        total *= len(a)
        if total > budget:
            raise ResourceLimitError(f"{total}+ configurations exceed budget {budget}")
    acc = LogSumAccumulator()
    for _, spins in _assignment_blocks(allowed):
        acc.add_array(_block_log_weights(graph, matrix, spins))
    return acc.value


def exact_Z(graph, matrix: InteractionMatrix, *, budget: int = DEFAULT_CONFIG_BUDGET) -> float:
    """ln Z by exhaustive summation over all q^{2n} configurations."""
    allowed = [tuple(range(matrix.q))] * graph.num_vertices
    return constrained_sum_log(graph, matrix, allowed, budget=budget)


def exact_log_weights(graph, matrix: InteractionMatrix, *, budget: int = DEFAULT_CONFIG_BUDGET) -> np.ndarray:
    """Log-weight of every configuration, indexed in canonical order.

    Index -> configuration via mixed radix base q, vertex 0 most
    significant. Materializes q^{2n} doubles; meant for tiny instances.
    """
    q = matrix.q
    total = q**graph.num_vertices
    if total > budget:
        raise ResourceLimitError(f"{total} configurations exceed budget {budget}")
    out = np.empty(total)
    allowed = [tuple(range(q))] * graph.num_vertices
    for start, spins in _assignment_blocks(allowed):
        out[start : start + spins.shape[0]] = _block_log_weights(graph, matrix, spins)
    return out


def decode_configuration(index: int, q: int, num_vertices: int) -> np.ndarray:
    spins = np.empty(num_vertices, dtype=np.int64)
    for pos in range(num_vertices - 1, -1, -1):
        spins[pos] = index % q
        index //= q
    return spins


def encode_configuration(sigma, q: int) -> int:
    out = 0
    for s in sigma:
        out = out * q + int(s)
    return out


def ground_state_sum_log(
    graph,
    matrix: InteractionMatrix,
    biclique: Biclique,
    fixed: dict[int, int],
    *,
    budget: int = DEFAULT_CONFIG_BUDGET,
) -> float:
    """ln sum of w over configurations agreeing with `fixed` and mapping
    every other side-i vertex into biclique side i.

    With `fixed` the combined assignment of a polymer configuration this is
    the right-hand side of the weight identity.
    """
    allowed = []
    for v in range(graph.num_vertices):
        if v in fixed:
            allowed.append((fixed[v],))
        else:
            allowed.append(biclique.side(graph.side(v)))
    return constrained_sum_log(graph, matrix, allowed, budget=budget)


# -- restricted sums over near-ground configurations -------------------------


@dataclass(frozen=True)
class RestrictedSums:
    """Exact restricted partition sums at one closeness level eps.

    A configuration belongs to a biclique's class when at least
    (1-eps)|V| of its vertices carry ground spins for that biclique;
    ln_z_eps sums the union over maximal bicliques, ln_z_hat counts
    multiplicity, ln_z_overlap sums configurations in >= 2 classes.
    """

    eps: float
    ln_z: float
    ln_z_eps: float
    ln_z_hat: float
    ln_z_overlap: float
    per_biclique: tuple[tuple[Biclique, float], ...]


def exact_restricted_sums(
    graph,
    matrix: InteractionMatrix,
    eps: float,
    *,
    budget: int = DEFAULT_CONFIG_BUDGET,
) -> RestrictedSums:
    if not (0.0 < eps <= 1.0):
        raise InvalidRangeError(f"eps must lie in (0,1], got {eps}")
    bicliques = enumerate_maximal_bicliques(matrix)
    q = matrix.q
    n = graph.n
    total = q**graph.num_vertices
    if total > budget:
        raise ResourceLimitError(f"{total} configurations exceed budget {budget}")
    # per-biclique 0/1 ground lookups per side
    luts = []
    for bic in bicliques:
        lut0 = np.zeros(q)
        lut1 = np.zeros(q)
        lut0[list(bic.b0)] = 1.0
        lut1[list(bic.b1)] = 1.0
        luts.append((lut0, lut1))
    threshold = (1.0 - eps) * graph.num_vertices - 1e-9

    acc_z = LogSumAccumulator()
    acc_union = LogSumAccumulator()
    acc_hat = LogSumAccumulator()
    acc_overlap = LogSumAccumulator()
    acc_per = [LogSumAccumulator() for _ in bicliques]
    allowed = [tuple(range(q))] * graph.num_vertices
    for _, spins in _assignment_blocks(allowed):
        lw = _block_log_weights(graph, matrix, spins)
        acc_z.add_array(lw)
        member_count = np.zeros(spins.shape[0], dtype=np.int64)
        for k, (lut0, lut1) in enumerate(luts):
            score = lut0[spins[:, :n]].sum(axis=1) + lut1[spins[:, n:]].sum(axis=1)
            member = score >= threshold
            member_count += member
            if member.any():
                acc_per[k].add_array(lw[member])
        acc_union.add_array(lw[member_count >= 1])
        acc_overlap.add_array(lw[member_count >= 2])
        if member_count.max(initial=0) > 0:
            counted = member_count > 0
            acc_hat.add_array((lw + np.log(np.maximum(member_count, 1)))[counted])
    return RestrictedSums(
        eps=eps,
        ln_z=acc_z.value,
        ln_z_eps=acc_union.value,
        ln_z_hat=acc_hat.value,
        ln_z_overlap=acc_overlap.value,
        per_biclique=tuple(zip(bicliques, (a.value for a in acc_per))),
    )


# -- exact polymer partition function ----------------------------------------


def _polymer_masks(model: PolymerModel, polymers):
    host = model.graph.host_adjacency
    masks = []
    blocks = []
    for poly in polymers:
        mask = 0
        block = 0
        for v in poly.vertices:
            mask |= 1 << v
            block |= 1 << v
            for u in host[v]:
                block |= 1 << u
        masks.append(mask)
        blocks.append(block)
    return masks, blocks


def iter_compatible_subsets(model: PolymerModel, polymers, *, term_budget=10_000_000):
    """Depth-first enumeration of all mutually compatible subsets.

    Yields (indices tuple, total log-weight) in canonical DFS order,
    starting with the empty set (log-weight 0).
    """
    masks, blocks = _polymer_masks(model, polymers)
    log_w = [model.weight_log(p) for p in polymers]
    count = 0

    def rec(start: int, blocked: int, indices: tuple[int, ...], acc: float):
        nonlocal count
        count += 1
        if count > term_budget:
            raise ResourceLimitError(f"compatible-subset count exceeds {term_budget}")
        yield indices, acc
        for i in range(start, len(polymers)):
            if log_w[i] == NEG_INF or masks[i] & blocked:
                continue
            yield from rec(i + 1, blocked | blocks[i], indices + (i,), acc + log_w[i])

    yield from rec(0, 0, (), 0.0)


def exact_polymer_Z(
    model: PolymerModel,
    size_cap: int | None = None,
    *,
    polymer_budget: int = DEFAULT_POLYMER_BUDGET,
    term_budget: int = 10_000_000,
) -> float:
    """ln of the polymer partition function by exhaustive subset summation.

    The empty configuration contributes weight 1.
    """
    polymers = model.enumerate_allowed(size_cap, budget=polymer_budget)
    acc = LogSumAccumulator()
    for _, lw in iter_compatible_subsets(model, polymers, term_budget=term_budget):
        acc.add(lw)
    return acc.value


def exact_polymer_distribution(
    model: PolymerModel,
    size_cap: int | None = None,
    *,
    polymer_budget: int = DEFAULT_POLYMER_BUDGET,
    term_budget: int = 1_000_000,
):
    """All compatible configurations with their exact Gibbs probabilities.

    Returns (configs, probs): configs[k] is a tuple of Polymer objects.
    """
    polymers = model.enumerate_allowed(size_cap, budget=polymer_budget)
    configs = []
    logs = []
    for indices, lw in iter_compatible_subsets(model, polymers, term_budget=term_budget):
        configs.append(tuple(polymers[i] for i in indices))
        logs.append(lw)
    logs_arr = np.array(logs)
    shift = logs_arr.max()
    probs = np.exp(logs_arr - shift)
    probs /= probs.sum()
    return configs, probs


# -- exact chain analysis ------------------------------------------------------


@dataclass(frozen=True)
class ChainAnalysis:
    """Exact transition-matrix analysis of the heat-bath chain."""

    num_states: int
    transition: np.ndarray
    stationary: np.ndarray
    detailed_balance_violation: float
    stationarity_violation: float
    spectral_gap: float | None
    states: tuple


def exact_chain_analysis(
    model: PolymerModel,
    params: ChainParams,
    *,
    region=None,
    state_budget: int = 10_000,
) -> ChainAnalysis:
    """Build the full transition matrix of the implemented chain step.

    Uses the chain's own candidate tables so that the matrix mirrors the
    sampler exactly; compares its stationary behaviour against the
    truncated polymer Gibbs distribution.
    """
    probe = PolymerChain(model, params, region=region, seed=0)
    table = probe._table
    cands = probe._cands
    active = probe._active

    # reachable states, BFS from the empty configuration
    empty: frozenset[int] = frozenset()
    index = {empty: 0}
    order = [empty]
    queue = [empty]
    transitions: list[dict[int, float]] = []

    def outcomes(state: frozenset[int], v: int):
        vbit = 1 << v
        kept = frozenset(i for i in state if not table.masks[i] & vbit)
        blocked = 0
        for i in kept:
            blocked |= table.blocks[i]
        opts = [(w, i) for (m, w, i) in cands[v] if not m & blocked]
        total = 1.0 + sum(w for w, _ in opts)
        yield kept, 1.0 / total
        for w, i in opts:
            yield kept | {i}, w / total

    while queue:
        state = queue.pop(0)
        row: dict[int, float] = {}
        if active:
            pick = 1.0 / len(active)
            for v in active:
                for nxt, p in outcomes(state, v):
                    if nxt not in index:
                        if len(index) >= state_budget:
                            raise ResourceLimitError(
                                f"reachable states exceed budget {state_budget}"
                            )
                        index[nxt] = len(order)
                        order.append(nxt)
                        queue.append(nxt)
                    row[index[nxt]] = row.get(index[nxt], 0.0) + pick * p
        else:
            row[index[state]] = 1.0
        transitions.append(row)

    num = len(order)
    p_mat = np.zeros((num, num))
    for i, row in enumerate(transitions):
        for j, p in row.items():
            p_mat[i, j] = p

    log_pi = np.array(
        [sum(table.log_weights[i] for i in state) for state in order]
    )
    pi = np.exp(log_pi - log_pi.max())
    pi /= pi.sum()

    db = float(np.abs(pi[:, None] * p_mat - (pi[:, None] * p_mat).T).max())
    stat = float(np.abs(pi @ p_mat - pi).max())

    gap = None
    if num <= 512:
        scale = np.sqrt(pi)
        sym = (scale[:, None] / scale[None, :]) * p_mat
        sym = 0.5 * (sym + sym.T)  # symmetric up to the db violation
        eigs = dense_eigenvalues(sym)
        gap = float(1.0 - eigs[1]) if num > 1 else 1.0

    states = tuple(
        tuple(sorted(table.polymers[i] for i in state)) for state in order
    )
    return ChainAnalysis(
        num_states=num,
        transition=p_mat,
        stationary=pi,
        detailed_balance_violation=db,
        stationarity_violation=stat,
        spectral_gap=gap,
        states=states,
    )


# -- dense eigensolver ---------------------------------------------------------


def dense_eigenvalues(matrix, *, max_sweeps: int = 100) -> np.ndarray:
    """Full spectrum of a symmetric matrix via cyclic Jacobi rotations.

    Terminates when the off-diagonal Frobenius norm drops to 1e-12
    (relative to max(1, ||A||_F)); returns eigenvalues sorted descending.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidRangeError(f"matrix must be square, got {a.shape}")
    n = a.shape[0]
    if n > 512:
        raise ResourceLimitError(f"dimension {n} exceeds 512")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        raise InvalidRangeError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    if n == 1:
        return a.reshape(1).copy()
    threshold = 1e-12 * max(1.0, float(np.linalg.norm(a)))
    skip = threshold / (n * n)
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        # norm of the off-diagonal entries themselves; subtracting squared
        # norms instead would cancel catastrophically near convergence
        off = float(np.linalg.norm(a[off_mask]))
        if off <= threshold:
            return np.sort(np.diag(a))[::-1].copy()
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
    raise NoConvergenceError(f"Jacobi sweeps exceeded {max_sweeps}")
