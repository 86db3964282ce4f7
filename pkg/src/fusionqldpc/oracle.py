"""Stabilizer-tableau ground truth for the foliated fusion lattice.

The resource states (branched chains with leaf photons, stars around each
check ancilla) are built as one graph state with every virtual qubit
instantiated.  Fusions are the commuting parity pairs ``X_a Z_b`` and
``Z_a X_b`` on the two leaves.  Because every measured observable commutes
with every other, a combination of recorded outcomes is deterministic
exactly when the product observable lies in the stabilizer group, which is
what the checks below test, both symbolically and by sampling.

Paulis are written ``i^r X^x Z^z`` with the X part to the left of the Z
part on every qubit, so Y is ``(x=1, z=1, r=1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .foliation import ANCILLA_SIDE, DecodingProblem, FoliatedLattice
from .noise import ENDPOINT_ANCILLA, FAILURE, LOSS, SKIPPED, SUCCESS, dead_spins, erasures_from_events

MAX_QUBITS = 6000


@dataclass(frozen=True)
class Pauli:
    """Sparse Pauli operator ``i^phase X^xs Z^zs`` on a register."""

    xs: frozenset
    zs: frozenset
    phase: int = 0

    @classmethod
    def from_string(cls, text: str) -> Pauli:
        """``"XZIY"`` style, qubit 0 first, optional leading sign."""
        sign = 0
        if text[:1] in "+-":
            sign = 2 if text[0] == "-" else 0
            text = text[1:]
        xs, zs, ys = set(), set(), 0
        for q, ch in enumerate(text):
            if ch in "XY":
                xs.add(q)
            if ch in "ZY":
                zs.add(q)
            if ch == "Y":
                ys += 1
            elif ch not in "XZI_":
                raise ValueError(f"bad Pauli letter {ch!r}")
        return cls(frozenset(xs), frozenset(zs), (sign + ys) % 4)

    @classmethod
    def x(cls, *qubits: int) -> Pauli:
        return cls(frozenset(qubits), frozenset())

    @classmethod
    def z(cls, *qubits: int) -> Pauli:
        return cls(frozenset(), frozenset(qubits))

    def __mul__(self, other: Pauli) -> Pauli:
        cross = len(self.zs & other.xs)
        return Pauli(self.xs ^ other.xs, self.zs ^ other.zs, (self.phase + other.phase + 2 * cross) % 4)

    def commutes(self, other: Pauli) -> bool:
        return (len(self.xs & other.zs) + len(self.zs & other.xs)) % 2 == 0

    @property
    def hermitian(self) -> bool:
        return (self.phase - len(self.xs & self.zs)) % 2 == 0

    @property
    def qubits(self) -> frozenset:
        return self.xs | self.zs


def pauli_product(ops: Iterable[Pauli]) -> Pauli:
    out = Pauli(frozenset(), frozenset())
    for op in ops:
        out = out * op
    return out


class StabilizerTableau:
    """Destabilizer/stabilizer tableau: rows ``0..n-1`` destabilizers, ``n..2n-1`` stabilizers."""

    def __init__(self, x: np.ndarray, z: np.ndarray, phase: np.ndarray):
        self.x = x
        self.z = z
        self.phase = phase
        self.n = x.shape[1]

    @classmethod
    def graph_state(cls, n: int, edges: Iterable[tuple[int, int]]) -> StabilizerTableau:
        """Graph state with generators ``K_v = X_v ∏ Z_N(v)`` and destabilizers ``Z_v``."""
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceed the tableau limit of {MAX_QUBITS}")
        x = np.zeros((2 * n, n), dtype=bool)
        z = np.zeros((2 * n, n), dtype=bool)
        idx = np.arange(n)
        z[idx, idx] = True
        x[n + idx, idx] = True
        for a, b in edges:
            if a == b:
                raise ValueError("self-loop in graph")
            z[n + a, b] ^= True
            z[n + b, a] ^= True
        return cls(x, z, np.zeros(2 * n, dtype=np.int64))

    def copy(self) -> StabilizerTableau:
        return StabilizerTableau(self.x.copy(), self.z.copy(), self.phase.copy())

    def stabilizer(self, i: int) -> Pauli:
        row = self.n + i
        return Pauli(
            frozenset(np.flatnonzero(self.x[row]).tolist()),
            frozenset(np.flatnonzero(self.z[row]).tolist()),
            int(self.phase[row]),
        )

    def anticommuting(self, p: Pauli) -> np.ndarray:
        """Boolean mask over all 2n rows anticommuting with ``p``."""
        out = np.zeros(2 * self.n, dtype=bool)
        for q in p.xs:
            out ^= self.z[:, q]
        for q in p.zs:
            out ^= self.x[:, q]
        return out

    def commutation_ok(self) -> bool:
        """Stabilizer rows pairwise commute."""
        sx = self.x[self.n :].astype(np.int64)
        sz = self.z[self.n :].astype(np.int64)
        sym = (sx @ sz.T + sz @ sx.T) & 1
        return not sym.any()

    def _rowmul(self, targets: np.ndarray, src: int) -> None:
        if targets.size == 0:
            return
        cross = (self.z[targets] & self.x[src]).sum(axis=1)
        self.phase[targets] = (self.phase[targets] + self.phase[src] + 2 * cross) % 4
        self.x[targets] ^= self.x[src]
        self.z[targets] ^= self.z[src]

    def _set_row(self, row: int, p: Pauli) -> None:
        self.x[row] = False
        self.z[row] = False
        self.x[row, list(p.xs)] = True
        self.z[row, list(p.zs)] = True
        self.phase[row] = p.phase

    def decompose(self, p: Pauli) -> tuple[np.ndarray, int] | None:
        """Stabilizer indices whose product is ``±p`` and the sign bit, or None.

        None means ``p`` is not (up to sign) in the stabilizer group, i.e. its
        outcome is random.
        """
        anti = self.anticommuting(p)
        if anti[self.n :].any():
            return None
        idx = np.flatnonzero(anti[: self.n])
        acc_x = np.zeros(self.n, dtype=bool)
        acc_z = np.zeros(self.n, dtype=bool)
        r = 0
        for i in idx:
            row = self.n + i
            r += int(self.phase[row]) + 2 * int((acc_z & self.x[row]).sum())
            acc_x ^= self.x[row]
            acc_z ^= self.z[row]
        if set(np.flatnonzero(acc_x).tolist()) != p.xs or set(np.flatnonzero(acc_z).tolist()) != p.zs:
            raise AssertionError("tableau is inconsistent: decomposition does not reproduce p")
        diff = (r - p.phase) % 4
        if diff % 2:
            raise ValueError("operator is not Hermitian")
        return idx, diff // 2

    def expectation(self, p: Pauli) -> int:
        """+1, -1 or 0 (random outcome)."""
        hit = self.decompose(p)
        if hit is None:
            return 0
        return -1 if hit[1] else 1

    def apply_pauli(self, p: Pauli) -> None:
        """Apply ``p`` to the state: generators anticommuting with it change sign."""
        anti = self.anticommuting(p)
        self.phase[anti] = (self.phase[anti] + 2) % 4

    def measure(self, p: Pauli, rng: np.random.Generator) -> tuple[int, bool]:
        """Measure a Hermitian Pauli; returns (outcome bit, deterministic)."""
        if not p.hermitian:
            raise ValueError("can only measure Hermitian Paulis")
        n = self.n
        anti = self.anticommuting(p)
        stab = np.flatnonzero(anti[n:])
        if stab.size == 0:
            _, bit = self.decompose(p)
            return bit, True
        pivot = n + int(stab[0])
        others = np.flatnonzero(anti)
        others = others[(others != pivot) & (others != pivot - n)]
        self._rowmul(others, pivot)
        self.x[pivot - n] = self.x[pivot]
        self.z[pivot - n] = self.z[pivot]
        self.phase[pivot - n] = self.phase[pivot]
        bit = int(rng.integers(2))
        self._set_row(pivot, p)
        self.phase[pivot] = (p.phase + 2 * bit) % 4
        return bit, False


# --- resource states and measurement patterns -------------------------------------------


@dataclass(frozen=True)
class ResourceLayout:
    """Qubit numbering of the resource-state union.

    Lattice nodes keep their ids; fusion ``f`` owns leaves ``n_nodes + 2f``
    (chain side) and ``n_nodes + 2f + 1`` (ancilla side).
    """

    n_nodes: int
    n_fusions: int

    @property
    def n_qubits(self) -> int:
        return self.n_nodes + 2 * self.n_fusions

    def chain_leaf(self, f: int) -> int:
        return self.n_nodes + 2 * f

    def ancilla_leaf(self, f: int) -> int:
        return self.n_nodes + 2 * f + 1


def resource_edges(lattice: FoliatedLattice) -> list[tuple[int, int]]:
    layout = ResourceLayout(lattice.n_nodes, len(lattice.fusions))
    edges = set()
    for v in range(lattice.n_nodes):
        for u in lattice.chain_neighbors(v):
            edges.add((min(u, v), max(u, v)))
    for f in range(len(lattice.fusions)):
        a, b = lattice.fusion_endpoints(f)
        edges.add((a, layout.chain_leaf(f)))
        edges.add((b, layout.ancilla_leaf(f)))
    return sorted(edges)


def build_resource_union(lattice: FoliatedLattice) -> StabilizerTableau:
    """Tableau of all branched chains and ancilla stars, before any fusion."""
    layout = ResourceLayout(lattice.n_nodes, len(lattice.fusions))
    return StabilizerTableau.graph_state(layout.n_qubits, resource_edges(lattice))


@dataclass
class OutcomeRecord:
    bits: list[int]
    deterministic: list[bool]

    def parity(self, entries: Iterable[int]) -> int:
        return sum(self.bits[i] for i in entries) & 1


def check_commuting(pattern: Sequence[Pauli]) -> None:
    touching: dict[int, list[int]] = {}
    for i, p in enumerate(pattern):
        for q in p.qubits:
            touching.setdefault(q, []).append(i)
    for q, entries in touching.items():
        for ii, i in enumerate(entries):
            for j in entries[ii + 1 :]:
                if not pattern[i].commutes(pattern[j]):
                    raise ValueError(f"pattern entries {i} and {j} do not commute")


def apply_measurement_pattern(
    tableau: StabilizerTableau, pattern: Sequence[Pauli], rng=None
) -> OutcomeRecord:
    """Measure a commuting list of Paulis in order, updating ``tableau`` in place."""
    check_commuting(pattern)
    rng = np.random.default_rng(rng)
    bits, det = [], []
    for p in pattern:
        b, d = tableau.measure(p, rng)
        bits.append(b)
        det.append(d)
    return OutcomeRecord(bits, det)


def fusion_parities(lattice: FoliatedLattice, f: int) -> dict[str, Pauli]:
    """The two commuting parities of fusion ``f`` keyed by the side they sign."""
    layout = ResourceLayout(lattice.n_nodes, len(lattice.fusions))
    a, b = layout.chain_leaf(f), layout.ancilla_leaf(f)
    return {"ancilla": Pauli(frozenset({a}), frozenset({b})), "data": Pauli(frozenset({b}), frozenset({a}))}


def column_observables(lattice: FoliatedLattice, problem: DecodingProblem) -> list[Pauli]:
    """Observable whose outcome is recorded in each decoding-problem column."""
    out = []
    for f in range(problem.n_fusions):
        out.append(fusion_parities(lattice, f)[problem.fusion_side[f]])
    for v in range(lattice.n_nodes):
        out.append(Pauli.x(v))
    return out


def canonical_flip(lattice: FoliatedLattice, problem: DecodingProblem, column: int) -> Pauli:
    """Single-qubit error that flips only the outcome recorded in ``column``."""
    layout = ResourceLayout(lattice.n_nodes, len(lattice.fusions))
    if column < problem.n_fusions:
        a = layout.chain_leaf(column)
        # Z_a anticommutes with X_a Z_b only; X_a with Z_a X_b only
        return Pauli.z(a) if problem.fusion_side[column] == ANCILLA_SIDE else Pauli.x(a)
    return Pauli.z(column - problem.n_fusions)


def _row_observable(observables: Sequence[Pauli], row: int) -> Pauli:
    return pauli_product(observables[j] for j in gf2.support(row))


def _stabilizer_masks(tableau: StabilizerTableau, ops: Sequence[Pauli]) -> np.ndarray:
    """Boolean matrix: generator s anticommutes with op j."""
    n = tableau.n
    out = np.zeros((n, len(ops)), dtype=bool)
    for j, p in enumerate(ops):
        out[:, j] = tableau.anticommuting(p)[n:]
    return out


def _span_basis(vectors: Iterable[int]) -> gf2.EchelonBasis:
    basis = gf2.EchelonBasis()
    for v in vectors:
        basis.add(v)
    return basis


def deterministic_subspace(
    tableau: StabilizerTableau, observables: Sequence[Pauli], columns: Sequence[int]
) -> list[int]:
    """Basis of outcome combinations over ``columns`` whose product is deterministic.

    Returned vectors are bitsets over the full column index range.
    """
    ops = [observables[c] for c in columns]
    omega = _stabilizer_masks(tableau, ops)
    M = gf2.Gf2Matrix(tuple(gf2.from_bits(r) for r in omega if r.any()), len(ops))
    local = gf2.nullspace_basis(M)
    out = []
    for vec in local:
        out.append(gf2.from_support(columns[i] for i in gf2.support(vec)))
    return out


# --- reports --------------------------------------------------------------------------------


@dataclass
class IncidenceReport:
    n_qubits: int
    n_detectors: int
    k: int
    random_rows: list[int] = field(default_factory=list)
    sign_errors: list[int] = field(default_factory=list)
    sampled_violations: list[tuple[int, int]] = field(default_factory=list)  # (seed, row)
    flip_mismatches: list[tuple[int, int]] = field(default_factory=list)  # (column, row)
    logical_random: list[int] = field(default_factory=list)
    logical_flip_mismatches: list[tuple[int, int]] = field(default_factory=list)
    kernel_dim: int = 0
    expected_dim: int = 0
    meta_dim: int = 0  # single-layer products of redundant X checks
    missing: int = 0  # oracle combinations outside the problem's span
    extra: int = 0  # problem combinations the oracle finds random

    @property
    def passed(self) -> bool:
        return not (
            self.random_rows
            or self.sign_errors
            or self.sampled_violations
            or self.flip_mismatches
            or self.logical_random
            or self.logical_flip_mismatches
            or self.missing
            or self.extra
        )

    @property
    def mismatches(self) -> int:
        return (
            len(self.random_rows)
            + len(self.sign_errors)
            + len(self.sampled_violations)
            + len(self.flip_mismatches)
            + len(self.logical_random)
            + len(self.logical_flip_mismatches)
            + self.missing
            + self.extra
        )

    def summary(self) -> str:
        status = "PASS" if self.passed else f"FAIL ({self.mismatches} mismatches)"
        return (
            f"incidence: {status} qubits={self.n_qubits} detectors={self.n_detectors} "
            f"k={self.k} deterministic_dim={self.kernel_dim} expected_dim={self.expected_dim} "
            f"meta_dim={self.meta_dim}"
        )


def verify_incidence(
    lattice: FoliatedLattice,
    problem: DecodingProblem,
    seeds: Sequence[int] = (0, 1),
    completeness: bool = True,
) -> IncidenceReport:
    """Check the decoding problem against the stabilizer simulation.

    (a) every detector and logical row is a +1 stabilizer of the resource
    union, and sampled measurement records satisfy every row;
    (b) the canonical single-qubit error of each column flips exactly the
    rows containing it;
    (c) with ``completeness``, the deterministic combinations supported on
    the problem's columns span exactly the detector and logical rows plus
    the layer meta-checks (see ``layer_meta_checks``).
    """
    tab0 = build_resource_union(lattice)
    obs = column_observables(lattice, problem)
    rep = IncidenceReport(tab0.n, problem.n_detectors, problem.k)

    det_rows = list(problem.h_det.rows)
    log_rows = list(problem.logicals.rows)
    decomp = []
    for kind, rows in (("det", det_rows), ("log", log_rows)):
        for r, row in enumerate(rows):
            hit = tab0.decompose(_row_observable(obs, row))
            if hit is None:
                (rep.random_rows if kind == "det" else rep.logical_random).append(r)
                decomp.append(None)
                continue
            if hit[1] and kind == "det":
                rep.sign_errors.append(r)
            elif hit[1]:
                rep.logical_random.append(r)
            decomp.append(hit[0])

    # sampled determinism: measure every fusion parity and every node
    pattern = []
    fusion_entry = {}
    for f in range(problem.n_fusions):
        pars = fusion_parities(lattice, f)
        for side in ("ancilla", "data"):
            fusion_entry[(f, side)] = len(pattern)
            pattern.append(pars[side])
    node_entry0 = len(pattern)
    pattern += [Pauli.x(v) for v in range(lattice.n_nodes)]
    entry_of = [fusion_entry[(f, problem.fusion_side[f])] for f in range(problem.n_fusions)]
    entry_of += [node_entry0 + v for v in range(lattice.n_nodes)]
    for seed in seeds:
        rec = apply_measurement_pattern(tab0.copy(), pattern, seed)
        for r, row in enumerate(det_rows + log_rows):
            if rec.parity(entry_of[j] for j in gf2.support(row)):
                rep.sampled_violations.append((seed, r))

    # single flips
    flips = [canonical_flip(lattice, problem, c) for c in range(problem.n_variables)]
    anti = _stabilizer_masks(tab0, flips).astype(np.int64)  # n_stab x n_vars
    all_rows = det_rows + log_rows
    for r, (row, idx) in enumerate(zip(all_rows, decomp)):
        if idx is None:
            continue
        flipped = anti[idx].sum(axis=0) & 1
        expected = gf2.to_bits(row, problem.n_variables)
        for c in np.flatnonzero(flipped != expected).tolist():
            if r < len(det_rows):
                rep.flip_mismatches.append((c, r))
            else:
                rep.logical_flip_mismatches.append((c, r - len(det_rows)))

    if completeness:
        kernel = deterministic_subspace(tab0, obs, list(range(problem.n_variables)))
        expected = _span_basis(all_rows)
        rep.expected_dim = len(expected)
        meta = layer_meta_checks(lattice, problem)
        for v in meta:
            expected.add(v)
        rep.meta_dim = len(expected) - rep.expected_dim
        rep.expected_dim = len(expected)
        found = _span_basis(kernel)
        rep.kernel_dim = len(found)
        rep.missing = sum(1 for v in kernel if not expected.contains(v))
        rep.extra = sum(1 for v in all_rows if not found.contains(v))
    return rep


def layer_meta_checks(lattice: FoliatedLattice, problem: DecodingProblem) -> list[int]:
    """Deterministic combinations confined to one primal layer.

    When the X checks are linearly dependent, the product of the dependent
    ancilla generators of a single layer is itself a stabilizer.  The
    three-layer detector cells do not use these.
    """
    h_x = lattice.code.h_x
    relations = gf2.nullspace_basis(h_x.transpose())
    out = []
    for layer in range(1, lattice.n_layers, 2):
        for rel in relations:
            vec = 0
            for i in gf2.support(rel):
                v = lattice.ancilla_node(i, layer)
                vec ^= 1 << int(problem.node_column_of[v])
                for f in lattice.fusions_at[v]:
                    vec ^= 1 << int(problem.fusion_column_of[f])
            out.append(vec)
    return out


# --- RUS event semantics ------------------------------------------------------------------


@dataclass(frozen=True)
class RusEvent:
    """Scripted outcome of one fusion; ``endpoint`` matters for failures."""

    fusion: int
    result: str  # "failure", "loss" or "skipped"
    endpoint: str = "ancilla"


@dataclass
class EventReport:
    n_events: int
    erased_columns: int
    predicted_dim: int
    oracle_dim: int  # deterministic combinations inside the row space
    local_checks: int  # deterministic combinations outside it
    sign_errors: int
    missing: int  # oracle-deterministic combinations the erasure model misses
    extra: int  # combinations the model keeps but the oracle finds random

    @property
    def passed(self) -> bool:
        return not (self.sign_errors or self.missing or self.extra)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"events: {status} events={self.n_events} erased={self.erased_columns} "
            f"predicted_dim={self.predicted_dim} oracle_dim={self.oracle_dim} "
            f"local_checks={self.local_checks}"
        )


_RESULT_CODE = {"success": SUCCESS, "failure": FAILURE, "loss": LOSS, "skipped": SKIPPED}


def event_observables(
    lattice: FoliatedLattice, problem: DecodingProblem, result, dead
) -> list[Pauli | None]:
    """What each column measures once some bonds are missing and spins are Z-measured.

    A live node's X outcome absorbs the Z outcomes of dead chain neighbours;
    a fused bond's bit absorbs the Z outcome of a dead partner spin, and a
    missing bond's bit is the Z outcome of the leaf on the live side.  None
    marks columns with no outcome.
    """
    layout = ResourceLayout(lattice.n_nodes, len(lattice.fusions))
    out: list[Pauli | None] = []
    for f in range(problem.n_fusions):
        a, b = lattice.fusion_endpoints(f)
        relevant_is_ancilla = problem.fusion_side[f] == ANCILLA_SIDE
        rel, partner = (b, a) if relevant_is_ancilla else (a, b)
        if dead[rel]:
            out.append(None)
            continue
        if result[f] == SUCCESS:
            p = fusion_parities(lattice, f)[problem.fusion_side[f]]
            if dead[partner]:
                p = p * Pauli.z(partner)
        else:
            # no bond: the live generator only misses its own leaf's Z
            leaf = layout.ancilla_leaf(f) if relevant_is_ancilla else layout.chain_leaf(f)
            p = Pauli.z(leaf)
        out.append(p)
    for v in range(lattice.n_nodes):
        if dead[v]:
            out.append(None)
            continue
        p = Pauli.x(v)
        for u in lattice.chain_neighbors(v):
            if dead[u]:
                p = p * Pauli.z(u)
        out.append(p)
    return out


def events_from_log(result, endpoint) -> list[RusEvent]:
    """Scripted events from sampled per-fusion RUS results."""
    names = {FAILURE: "failure", LOSS: "loss", SKIPPED: "skipped"}
    out = []
    for f, (r, e) in enumerate(zip(result, endpoint)):
        if r != SUCCESS:
            out.append(RusEvent(f, names[int(r)], "ancilla" if e == ENDPOINT_ANCILLA else "data"))
    return out


def verify_event_semantics(
    lattice: FoliatedLattice, problem: DecodingProblem, events: Sequence[RusEvent]
) -> EventReport:
    """Compare the erased-column model with the simulated state after RUS events.

    The model predicts that the deterministic X-lattice combinations are the
    detector/logical combinations avoiding every erased column.  The oracle
    measures the failed, lost and skipped fusions' leaves and the dead spins
    in Z, and computes which combinations of the remaining outcomes are
    deterministic.
    """
    n_f = problem.n_fusions
    result = np.full(n_f, SUCCESS, dtype=np.int8)
    endpoint = np.zeros(n_f, dtype=np.int8)
    for ev in events:
        result[ev.fusion] = _RESULT_CODE[ev.result]
        endpoint[ev.fusion] = ENDPOINT_ANCILLA if ev.endpoint == "ancilla" else 2
    dead = dead_spins(lattice, result, endpoint)
    erased = set(erasures_from_events(lattice, problem, result, endpoint).tolist())
    obs = event_observables(lattice, problem, result, dead)

    tab0 = build_resource_union(lattice)
    available = [c for c, p in enumerate(obs) if p is not None]
    kernel = deterministic_subspace(tab0, obs, available)

    # model prediction: row combinations with no support on erased columns
    erased_mask = gf2.from_support(erased)
    rows = list(problem.h_det.rows) + list(problem.logicals.rows) + layer_meta_checks(lattice, problem)
    predicted = _combinations_avoiding(rows, erased_mask)

    # columns that the model keeps but the oracle cannot see must not be used
    missing_cols = gf2.from_support(c for c, p in enumerate(obs) if p is None) & ~erased_mask
    found = _span_basis(kernel)
    model = _span_basis(predicted)
    extra = sum(1 for v in predicted if (v & missing_cols) or not found.contains(v))
    # compare inside the row space; other deterministic combinations (a live
    # node whose whole neighbourhood was Z-measured) are new local checks
    span_rows = _span_basis(rows)
    joint = span_rows.copy()
    for v in kernel:
        joint.add(v)
    in_span = len(found) + len(span_rows) - len(joint)
    missing = in_span - len(model) + extra
    sign_errors = 0
    for v in predicted:
        if v & missing_cols:
            continue
        hit = tab0.decompose(_row_observable(obs, v))
        if hit is not None and hit[1]:
            sign_errors += 1
    return EventReport(
        n_events=len(events),
        erased_columns=len(erased),
        predicted_dim=len(model),
        oracle_dim=in_span,
        local_checks=len(found) - in_span,
        sign_errors=sign_errors,
        missing=missing,
        extra=extra,
    )


def _combinations_avoiding(rows: Sequence[int], mask: int) -> list[int]:
    """Basis of the span of ``rows`` restricted to vectors with no bits in ``mask``.

    Eliminates the masked columns first (they are the low-priority pivots),
    keeping the combinations that end up with no masked support.
    """
    basis: dict[int, int] = {}
    out = []
    for row in rows:
        vec = row
        while True:
            hit = vec & mask
            if not hit:
                break
            low = hit & -hit
            pivot = basis.get(low)
            if pivot is None:
                basis[low] = vec
                vec = 0
                break
            vec ^= pivot
        if vec:
            out.append(vec)
    return out
