"""Biclique polymer model: deviation regions from a ground-state biclique.

Fix a maximal biclique (B_0, B_1). A polymer is a G^3-connected vertex set
together with a non-ground spin per vertex (ground spins on side i are
B_i). Its weight combines the internal edge factors, one boundary factor
F_u per neighbor of the region, and a ground-state count in the
denominator; see `PolymerModel.weight_log`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidRangeError, ResourceLimitError
from .logspace import NEG_INF
from .spin_model import Biclique, InteractionMatrix, is_biclique

SIZE_FUZZ = 1e-9  # 2*eps*n can land one ulp under an integer; bound is inclusive


@dataclass(frozen=True, order=True)
class Polymer:
    """Immutable vertex set with a spin per vertex (parallel sorted tuples)."""

    vertices: tuple[int, ...]
    spins: tuple[int, ...]

    def __post_init__(self):
        if not self.vertices:
            raise InvalidRangeError("polymer needs a nonempty vertex set")
        if len(self.vertices) != len(self.spins):
            raise InvalidRangeError("vertices and spins must be parallel")
        if list(self.vertices) != sorted(set(self.vertices)):
            raise InvalidRangeError("vertices must be sorted and distinct")

    @classmethod
    def from_map(cls, assignment: dict[int, int]) -> "Polymer":
        vs = tuple(sorted(assignment))
        return cls(vs, tuple(assignment[v] for v in vs))

    @property
    def size(self) -> int:
        return len(self.vertices)

    def spin_map(self) -> dict[int, int]:
        return dict(zip(self.vertices, self.spins))


def are_compatible(graph, a: Polymer, b: Polymer) -> bool:
    """True iff the vertex sets are at G^3-distance greater than 1."""
    host = graph.host_adjacency
    avs = set(a.vertices)
    for v in b.vertices:
        if v in avs:
            return False
        for u in host[v]:
            if u in avs:
                return False
    return True


class PolymerConfiguration:
    """A set of pairwise compatible polymers with its vertex -> polymer cover."""

    __slots__ = ("polymers", "cover")

    def __init__(self, polymers, *, graph=None):
        polys = tuple(sorted(polymers))
        cover: dict[int, Polymer] = {}
        for p in polys:
            for v in p.vertices:
                if v in cover:
                    raise InvalidRangeError(f"vertex {v} covered twice")
                cover[v] = p
        if graph is not None:
            for i, p in enumerate(polys):
                for q in polys[i + 1:]:
                    if not are_compatible(graph, p, q):
                        raise InvalidRangeError(
                            f"incompatible polymers {p.vertices} / {q.vertices}"
                        )
        self.polymers = polys
        self.cover = cover

    def __len__(self) -> int:
        return len(self.polymers)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolymerConfiguration) and self.polymers == other.polymers

    def __hash__(self) -> int:
        return hash(self.polymers)

    def union_vertices(self) -> frozenset[int]:
        return frozenset(self.cover)

    def spin_map(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for p in self.polymers:
            out.update(p.spin_map())
        return out


def connected_vertex_sets(neighbors, root: int, size_cap: int, rank) -> list[tuple[int, ...]]:
    """All connected sets containing `root` whose members all rank >= rank[root].

    Exclusive-neighborhood growth: when a vertex joins the set, only its
    neighbors not already adjacent to the set enter the extension pool, so
    every set is emitted exactly once. With rank = vertex id this yields
    sets whose minimum is `root`; ranking `root` below everything yields
    all connected sets through `root`.
    """
    if size_cap < 1:
        return []
    out: list[tuple[int, ...]] = []
    root_rank = rank[root]
    seen_adjacent = {root}

    def grow(members: list[int], ext: list[int], adjacent: set[int]):
        out.append(tuple(sorted(members)))
        if len(members) == size_cap:
            return
        for i, w in enumerate(ext):
            fresh = [
                u
                for u in neighbors[w]
                if rank.get(u, -1) > root_rank and u not in adjacent
            ]
            grow(members + [w], ext[i + 1:] + fresh, adjacent | set(fresh))

    ext0 = [u for u in neighbors[root] if rank.get(u, -1) > root_rank]
    grow([root], ext0, seen_adjacent | set(ext0))
    return out


@dataclass(frozen=True)
class SamplingConditionReport:
    """Exhaustive check of the decay bound w <= e^{-tau |V|} up to a size cap.

    The tau bound is a theorem only under the verification lemma's premises
    (eps >= lambda^2/Delta^2 and eps <= (1-delta)/(40 q ln(q Delta)));
    outside them it is a diagnostic. The boundary-factor bound
    F_u <= |B_i| - 1 + delta holds unconditionally for maximal bicliques.
    """

    polymers_checked: int
    size_cap: int
    tau: float
    weight_violations: tuple[str, ...]
    boundary_violations: tuple[str, ...]
    premises_hold: bool | None
    min_weight_slack: float

    @property
    def ok(self) -> bool:
        return not self.weight_violations and not self.boundary_violations


class PolymerModel:
    """Bundle of (graph, matrix, biclique, eps) defining one polymer model."""

    def __init__(
        self,
        graph,
        matrix: InteractionMatrix,
        biclique: Biclique,
        eps: float,
        *,
        require_maximal: bool = True,
    ):
        if not (0.0 < eps < 1.0):
            raise InvalidRangeError(f"eps must lie in (0,1), got {eps}")
        if not is_biclique(matrix, biclique.b0, biclique.b1):
            raise InvalidRangeError(f"{biclique} is not a biclique of the matrix")
        if require_maximal:
            # the boundary bound F_u <= |B_i|-1+delta needs maximality
            _assert_maximal(matrix, biclique)
        self.graph = graph
        self.matrix = matrix
        self.biclique = biclique
        self.eps = eps
        self.max_size = int(math.floor(2.0 * eps * graph.n + SIZE_FUZZ))
        q = matrix.q
        ground = (frozenset(biclique.b0), frozenset(biclique.b1))
        self.ground = ground
        self._allowed_by_side = (
            tuple(s for s in range(q) if s not in ground[0]),
            tuple(s for s in range(q) if s not in ground[1]),
        )
        self.active_vertices = tuple(
            v for v in range(graph.num_vertices) if self._allowed_by_side[graph.side(v)]
        )
        self.tau = (1.0 - matrix.delta) / (4.0 * eps * q)
        self._tables: dict[int, "object"] = {}

    # -- spins ------------------------------------------------------------

    def ground_spins(self, v: int) -> frozenset[int]:
        return self.ground[self.graph.side(v)]

    def allowed_spins(self, v: int) -> tuple[int, ...]:
        return self._allowed_by_side[self.graph.side(v)]

    # -- polymer predicates -------------------------------------------------

    def is_polymer(self, poly: Polymer) -> bool:
        """Type invariants: non-ground spins and G^3-connected vertex set."""
        for v, s in zip(poly.vertices, poly.spins):
            if s not in self.allowed_spins(v):
                return False
        return self._host_connected(poly.vertices)

    def is_allowed(self, poly: Polymer) -> bool:
        """Membership in the allowed class: valid polymer of size <= 2*eps*n."""
        return poly.size <= self.max_size and self.is_polymer(poly)

    def _host_connected(self, vertices) -> bool:
        vs = set(vertices)
        host = self.graph.host_adjacency
        stack = [next(iter(vs))]
        seen = {stack[0]}
        while stack:
            v = stack.pop()
            for u in host[v]:
                if u in vs and u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(vs)

    def are_compatible(self, a: Polymer, b: Polymer) -> bool:
        return are_compatible(self.graph, a, b)

    # -- weight -----------------------------------------------------------

    def weight_log(self, poly: Polymer) -> float:
        """ln of the polymer weight; -inf when any factor vanishes.

        Numerator: product of H over edges internal to the region, times
        F_u over boundary vertices u, where for u on side i
            F_u = sum_{j in B_i} prod_{v in region adjacent to u} H[j, s_v].
        Denominator: |B_i| to the power |side-i part of region + boundary|.
        """
        graph = self.graph
        h = self.matrix.entries
        logh = self.matrix.log_entries
        spin = dict(zip(poly.vertices, poly.spins))
        inside = set(poly.vertices)
        acc = 0.0
        boundary: dict[int, list[int]] = {}
        for v in poly.vertices:
            sv = spin[v]
            for u in graph.neighbors(v):
                if u in inside:
                    if u < v:
                        term = logh[spin[u], sv]
                        if term == NEG_INF:
                            return NEG_INF
                        acc += term
                else:
                    boundary.setdefault(u, []).append(sv)
        for u, adjacent_spins in boundary.items():
            side = graph.side(u)
            f_u = float(
                np.prod(h[np.ix_(list(self.biclique.side(side)), adjacent_spins)], axis=1).sum()
            )
            if f_u <= 0.0:
                return NEG_INF
            acc += math.log(f_u)
        plus = inside | boundary.keys()
        n = graph.n
        count0 = sum(1 for v in plus if v < n)
        acc -= count0 * math.log(len(self.biclique.b0))
        acc -= (len(plus) - count0) * math.log(len(self.biclique.b1))
        return acc

    def boundary_factor(self, poly: Polymer, u: int) -> float:
        """F_u for a boundary vertex u of the polymer (linear scale)."""
        spin = poly.spin_map()
        adjacent = [spin[v] for v in self.graph.neighbors(u) if v in spin]
        if not adjacent:
            raise InvalidRangeError(f"vertex {u} is not on the polymer boundary")
        side = self.graph.side(u)
        h = self.matrix.entries
        return float(
            np.prod(h[np.ix_(list(self.biclique.side(side)), adjacent)], axis=1).sum()
        )

    def config_weight_log(self, polymers) -> float:
        total = 0.0
        for p in polymers:
            total += self.weight_log(p)
            if total == NEG_INF:
                return NEG_INF
        return total

    # -- enumeration --------------------------------------------------------

    def enumerate_allowed(
        self, size_cap: int | None = None, *, budget: int = 1_000_000
    ) -> list[Polymer]:
        """Every allowed polymer of size <= size_cap, exactly once, sorted.

        Vertex sets come from exclusive-neighborhood growth over the host
        graph restricted to vertices that have a non-ground spin; each set
        is crossed with all non-ground spin assignments.
        """
        cap = self.max_size if size_cap is None else min(size_cap, self.max_size)
        if cap < 1:
            return []
        active = self.active_vertices
        host = {
            v: tuple(u for u in self.graph.host_adjacency[v] if u in set(active))
            for v in active
        }
        rank = {v: v for v in active}
        out: list[Polymer] = []
        for root in active:
            for vertex_set in connected_vertex_sets(host, root, cap, rank):
                options = [self.allowed_spins(v) for v in vertex_set]
                count = 1
                for opts in options:
                    count *= len(opts)
                if len(out) + count > budget:
                    raise ResourceLimitError(
                        f"polymer enumeration exceeded budget {budget}"
                    )
                for combo in _product(options):
                    out.append(Polymer(vertex_set, combo))
        out.sort()
        return out

    # -- sampling-condition verification ------------------------------------

    def verify_sampling_condition(
        self,
        size_cap: int,
        *,
        lam: float | None = None,
        budget: int = 1_000_000,
    ) -> SamplingConditionReport:
        """Check w(gamma) <= e^{-tau |V_gamma|} and F_u <= |B_i|-1+delta.

        Exhaustive over allowed polymers with |V_gamma| <= size_cap;
        violations are reported with witnesses, not raised.
        """
        graph = self.graph
        delta = self.matrix.delta
        tau = self.tau
        weight_bad: list[str] = []
        boundary_bad: list[str] = []
        min_slack = float("inf")
        polymers = self.enumerate_allowed(size_cap, budget=budget) if size_cap > 0 else []
        for poly in polymers:
            lw = self.weight_log(poly)
            slack = -tau * poly.size - lw
            if lw != NEG_INF:
                min_slack = min(min_slack, slack)
            if lw > -tau * poly.size + 1e-9:
                weight_bad.append(
                    f"gamma {dict(zip(poly.vertices, poly.spins))}: "
                    f"ln w = {lw:.6g} > -tau|V| = {-tau * poly.size:.6g}"
                )
            for u in graph.boundary(poly.vertices):
                cap_u = len(self.biclique.side(graph.side(u))) - 1 + delta
                f_u = self.boundary_factor(poly, u)
                if f_u > cap_u + 1e-12:
                    boundary_bad.append(
                        f"gamma {dict(zip(poly.vertices, poly.spins))}, u={u}: "
                        f"F_u = {f_u:.6g} > {cap_u:.6g}"
                    )
        premises = None
        if lam is not None:
            q = self.matrix.q
            deg = graph.degree
            premises = (
                self.eps >= (lam / deg) ** 2
                and self.eps <= (1.0 - delta) / (40.0 * q * math.log(q * deg))
            )
        return SamplingConditionReport(
            polymers_checked=len(polymers),
            size_cap=size_cap,
            tau=tau,
            weight_violations=tuple(weight_bad),
            boundary_violations=tuple(boundary_bad),
            premises_hold=premises,
            min_weight_slack=min_slack,
        )


def dump_polymers(model: PolymerModel, polymers) -> str:
    """Debug dump, one `gamma {v:spin, ...} logw=<value>` line per polymer."""
    lines = []
    for poly in polymers:
        body = ", ".join(f"{v}:{s}" for v, s in zip(poly.vertices, poly.spins))
        lines.append(f"gamma {{{body}}} logw={model.weight_log(poly):.12g}")
    return "\n".join(lines) + ("\n" if lines else "")


def aggregate_size_min_n(eps: float, degree: int) -> float:
    """n above which no >6*eps*n vertex set splits into <=2*eps*n host components.

    Diagnostic threshold (needs eps >= lambda/Delta); not enforced anywhere.
    """
    return 1.0 / (2.0 * eps * eps * degree)


def _product(options):
    """itertools.product over spin tuples, kept explicit for empty guard."""
    if not options:
        return
    counts = [len(o) for o in options]
    if any(c == 0 for c in counts):
        return
    idx = [0] * len(options)
    while True:
        yield tuple(o[i] for o, i in zip(options, idx))
        k = len(idx) - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < counts[k]:
                break
            idx[k] = 0
            k -= 1
        if k < 0:
            return


def _assert_maximal(matrix: InteractionMatrix, biclique: Biclique) -> None:
    q = matrix.q
    s0, s1 = set(biclique.b0), set(biclique.b1)
    for j in range(q):
        if j not in s0 and is_biclique(matrix, s0 | {j}, s1):
            raise InvalidRangeError(f"{biclique} not maximal: spin {j} extends b0")
        if j not in s1 and is_biclique(matrix, s0, s1 | {j}):
            raise InvalidRangeError(f"{biclique} not maximal: spin {j} extends b1")
