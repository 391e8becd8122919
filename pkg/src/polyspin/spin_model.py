"""Interaction matrices, bicliques, configuration weights, premise checks.

Spins are 0-based: [q] = {0, ..., q-1}. An interaction matrix is kept in
normalized form (largest entry exactly 1, every other entry <= delta for a
stored delta in (0, 1)); `normalize_matrix` brings a raw matrix into this
form and reports the log-scale factor that restores raw-matrix weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroMatrixError,
    AsymmetricMatrixError,
    ConstantMatrixError,
    InvalidRangeError,
    MatrixFormatError,
)
from .logspace import NEG_INF

DEFAULT_DELTA = 0.5  # used when every non-1 entry is 0 and any delta in (0,1) works


class InteractionMatrix:
    """Symmetric nonnegative q x q matrix with max entry 1 and gap delta.

    Immutable after construction; `log_entries` carries ln of each entry
    with -inf standing in for exact zeros.
    """

    __slots__ = ("q", "entries", "delta", "log_entries")

    def __init__(self, entries, delta: float):
        arr = np.array(entries, dtype=float)
        arr.setflags(write=False)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidRangeError(f"entries must be square, got shape {arr.shape}")
        q = arr.shape[0]
        if q < 2:
            raise InvalidRangeError(f"need q >= 2 spins, got q={q}")
        if not np.array_equal(arr, arr.T):
            raise AsymmetricMatrixError("interaction matrix must be symmetric")
        if np.any(arr < 0.0):
            raise InvalidRangeError("interaction matrix entries must be nonnegative")
        if arr.max() != 1.0:
            raise InvalidRangeError("normalized matrix must have max entry exactly 1")
        if not (0.0 < delta < 1.0):
            raise InvalidRangeError(f"delta must lie in (0,1), got {delta}")
        off = arr[arr != 1.0]
        if off.size and off.max() > delta:
            raise InvalidRangeError(
                f"entry {off.max()} exceeds delta={delta} but is not 1"
            )
        self.q = q
        self.entries = arr
        self.delta = float(delta)
        with np.errstate(divide="ignore"):
            logs = np.log(arr)
        logs.setflags(write=False)
        self.log_entries = logs

    def __repr__(self) -> str:
        return f"InteractionMatrix(q={self.q}, delta={self.delta})"


@dataclass(frozen=True, order=True)
class Biclique:
    """Spin-set pair (b0, b1) with every cross entry equal to 1.

    Sides are stored as sorted tuples; both must be nonempty (empty-sided
    pairs contribute 0 to every mixture and are excluded throughout).
    """

    b0: tuple[int, ...]
    b1: tuple[int, ...]

    def __post_init__(self):
        if not self.b0 or not self.b1:
            raise InvalidRangeError("biclique sides must be nonempty")
        object.__setattr__(self, "b0", tuple(sorted(self.b0)))
        object.__setattr__(self, "b1", tuple(sorted(self.b1)))

    def side(self, i: int) -> tuple[int, ...]:
        return self.b0 if i == 0 else self.b1

    def contains(self, other: "Biclique") -> bool:
        return set(other.b0) <= set(self.b0) and set(other.b1) <= set(self.b1)


def is_biclique(matrix: InteractionMatrix, b0, b1) -> bool:
    """True iff matrix[i, j] == 1 for every i in b0, j in b1."""
    b0 = list(b0)
    b1 = list(b1)
    if not b0 or not b1:
        return True  # vacuous
    return bool(np.all(matrix.entries[np.ix_(b0, b1)] == 1.0))


def normalize_matrix(raw, delta_override: float | None = None):
    """Scale a raw symmetric nonnegative matrix to normalized form.

    Returns (matrix, log_scale) with log_scale = ln(max entry), so that
    ln Z(raw) = |E| * log_scale + ln Z(normalized) on any graph. delta is
    the second-largest distinct scaled value (the smallest valid choice);
    when that value is 0 any delta in (0,1) works and DEFAULT_DELTA is
    stored unless `delta_override` is given.
    """
    arr = np.array(raw, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidRangeError(f"matrix must be square, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise InvalidRangeError("need q >= 2 spins")
    if not np.array_equal(arr, arr.T):
        raise AsymmetricMatrixError("matrix must be symmetric (exact equality)")
    if np.any(arr < 0.0):
        raise InvalidRangeError("matrix entries must be nonnegative")
    top = float(arr.max())
    if top == 0.0:
        raise AllZeroMatrixError("all entries are zero; Z=0 on any nonempty graph")
    if float(arr.min()) == top:
        raise ConstantMatrixError(
            "all entries equal; Z = q^|V| * c^|E| in closed form"
        )
    scaled = arr / top
    second = float(scaled[scaled != 1.0].max())
    if second > 0.0:
        delta = second
        if delta_override is not None:
            if not (second <= delta_override < 1.0):
                raise InvalidRangeError(
                    f"delta override {delta_override} not in [{second}, 1)"
                )
            delta = float(delta_override)
    else:
        delta = DEFAULT_DELTA if delta_override is None else float(delta_override)
    return InteractionMatrix(scaled, delta), math.log(top)


def enumerate_maximal_bicliques(matrix: InteractionMatrix) -> list[Biclique]:
    """All inclusion-maximal bicliques with both sides nonempty.

    Uses the closure characterization: (B0, B1) is maximal iff B1 is the
    full set of columns compatible with B0 and vice versa, so it suffices
    to close each nonempty row subset (2^q closures instead of the 2^q x
    2^q pair scan; the pair scan survives as the test oracle). Output is
    sorted lexicographically by (b0, b1).
    """
    q = matrix.q
    ones = matrix.entries == 1.0
    full = (1 << q) - 1

    col_mask = [0] * q  # col_mask[i] = bitmask of j with H[i,j] == 1
    for i in range(q):
        m = 0
        for j in range(q):
            if ones[i, j]:
                m |= 1 << j
        col_mask[i] = m

    def common(mask: int) -> int:
        out = full
        i = 0
        while mask:
            if mask & 1:
                out &= col_mask[i]
                if not out:
                    return 0
            mask >>= 1
            i += 1
        return out

    def bits(mask: int) -> tuple[int, ...]:
        return tuple(i for i in range(q) if (mask >> i) & 1)

    found = set()
    for sub in range(1, 1 << q):
        b1 = common(sub)
        if not b1:
            continue
        b0 = common(b1)  # closure; symmetric H makes row/col roles interchangeable
        found.add((b0, b1))
    return sorted(Biclique(bits(m0), bits(m1)) for m0, m1 in found)


def configuration_weight_log(graph, matrix: InteractionMatrix, sigma) -> float:
    """ln of the configuration weight: sum over edges of ln H[s_u, s_v].

    Returns -inf when any edge factor is exactly 0.
    """
    sig = np.asarray(sigma, dtype=np.int64)
    if sig.shape != (graph.num_vertices,):
        raise InvalidRangeError(
            f"configuration length {sig.shape} != {graph.num_vertices} vertices"
        )
    edges = graph.edge_array
    if edges.shape[0] == 0:
        return 0.0
    terms = matrix.log_entries[sig[edges[:, 0]], sig[edges[:, 1]]]
    if np.any(np.isneginf(terms)):
        return NEG_INF
    return float(terms.sum())


@dataclass(frozen=True)
class PremiseReport:
    """Outcome of the degree/spectral-gap premise check.

    epsilon and tau follow the closed forms
        epsilon = (1 - delta) / (50 q ln(q Delta))
        tau     = (1 - delta) / (4 epsilon q)
    and tau_ok records tau >= 5 + 3 ln((q-1) Delta^3), the constant the
    sampling condition needs.
    """

    degree_gap_ok: bool
    degree_ok: bool
    epsilon: float
    tau: float
    tau_ok: bool
    details: tuple[str, ...] = field(default=())

    @property
    def all_ok(self) -> bool:
        return self.degree_gap_ok and self.degree_ok and self.tau_ok


def check_premises(matrix: InteractionMatrix, degree: int, lam: float) -> PremiseReport:
    """Evaluate both main-theorem inequalities for (H, Delta, lambda)."""
    if degree < 3:
        raise InvalidRangeError(f"degree must be >= 3, got {degree}")
    if not (0.0 < lam < degree):
        raise InvalidRangeError(f"lambda must lie in (0, {degree}), got {lam}")
    q = matrix.q
    delta = matrix.delta
    log_qd = math.log(q * degree)

    gap_lhs = degree / lam
    gap_rhs = 100.0 / (1.0 - delta) * q * q * log_qd
    degree_gap_ok = gap_lhs >= gap_rhs

    deg_rhs = (10.0 / (1.0 - delta) * q * log_qd) ** 4
    degree_ok = degree >= deg_rhs

    epsilon = (1.0 - delta) / (50.0 * q * log_qd)
    tau = (1.0 - delta) / (4.0 * epsilon * q)
    tau_floor = 5.0 + 3.0 * math.log((q - 1) * degree**3)
    tau_ok = tau >= tau_floor

    details = (
        f"degree/lambda = {gap_lhs:.6g} >= {gap_rhs:.6g}: {degree_gap_ok}",
        f"degree = {degree:.6g} >= {deg_rhs:.6g}: {degree_ok}",
        f"epsilon = {epsilon:.12g}",
        f"tau = {tau:.12g} >= {tau_floor:.6g}: {tau_ok}",
    )
    return PremiseReport(degree_gap_ok, degree_ok, epsilon, tau, tau_ok, details)


# --- text format: line 1 "q <q> delta <delta>", then q rows of q entries ---


def format_matrix(matrix: InteractionMatrix) -> str:
    lines = [f"q {matrix.q} delta {matrix.delta!r}"]
    for row in matrix.entries:
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> InteractionMatrix:
    lines = text.splitlines()
    if not lines:
        raise MatrixFormatError("line 1: empty matrix file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "q" or head[2] != "delta":
        raise MatrixFormatError("line 1: expected header 'q <q> delta <delta>'")
    try:
        q = int(head[1])
        delta = float(head[3])
    except ValueError as exc:
        raise MatrixFormatError(f"line 1: {exc}") from exc
    if q < 2:
        raise MatrixFormatError(f"line 1: q must be >= 2, got {q}")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != q:
        raise MatrixFormatError(
            f"line {len(lines)}: expected {q} matrix rows, found {len(body)}"
        )
    rows = []
    for k, ln in enumerate(body, start=2):
        parts = ln.split()
        if len(parts) != q:
            raise MatrixFormatError(f"line {k}: expected {q} entries, found {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise MatrixFormatError(f"line {k}: {exc}") from exc
    try:
        return InteractionMatrix(rows, delta)
    except (AsymmetricMatrixError, InvalidRangeError) as exc:
        raise MatrixFormatError(f"line 2-{len(body) + 1}: {exc}") from exc


def load_matrix(path) -> InteractionMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def save_matrix(matrix: InteractionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(matrix))
