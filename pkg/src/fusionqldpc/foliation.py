"""Fusion-based foliated lattice for a CSS code.

Round ``t`` occupies two layers: a dual layer ``2t`` where Z checks are
measured and a primal layer ``2t + 1`` where X checks are measured.  Every
base qubit ``j`` contributes a chain node per layer; every check contributes
an ancilla node (the centre of a star / GHZ resource state) to its layer.
Each chain-ancilla bond of the Tanner graph is realised by one fusion between
a leaf photon of the chain node and a leaf photon of the ancilla star.

Fusion convention.  A fusion joins leaf ``a`` (chain side) and leaf ``b``
(ancilla side) and, on success, measures the commuting parities ``X_a Z_b``
and ``Z_a X_b``.  This turns the two leaves into a graph bond between the
chain and ancilla nodes; the outcome of ``X_a Z_b`` fixes the sign of the
ancilla node's new stabilizer generator and ``Z_a X_b`` that of the chain
node.  We call these the *ancilla-side* and *data-side* bits of the fusion.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import gf2
from .codes import CssCode
from .gf2 import Gf2Matrix

CHAIN, ANCILLA = "chain", "ancilla"
FUSION_BIT, VIRTUAL_CHAIN, VIRTUAL_ANCILLA = "fusion-bit", "virtual-chain-node", "virtual-ancilla-node"
ANCILLA_SIDE, DATA_SIDE = "ancilla", "data"


class ConsistencyError(RuntimeError):
    """A detector could not be written over the outcome variables."""


@dataclass(frozen=True)
class Fusion:
    id: int
    data_qubit: int
    check_index: int
    check_type: str  # "X" or "Z"
    time: int
    layer: int


@dataclass(frozen=True)
class DetectorCell:
    check_index: int
    time: int
    type: str
    support: tuple[int, ...]  # node ids


@dataclass
class FoliatedLattice:
    code: CssCode
    T: int
    periodic_time: bool
    fusions: list[Fusion]
    node_kind: np.ndarray  # 0 chain, 1 ancilla
    node_index: np.ndarray  # base qubit or check index
    node_layer: np.ndarray
    layer_offsets: list[int]  # first node id of each layer
    fusions_at: list[list[int]] = field(repr=False)

    @property
    def n_layers(self) -> int:
        return 2 * self.T

    @property
    def n_nodes(self) -> int:
        return len(self.node_kind)

    @staticmethod
    def layer_type(layer: int) -> str:
        """Check type measured in a layer: Z on dual layers, X on primal ones."""
        return "Z" if layer % 2 == 0 else "X"

    def layer_of(self, t: int, kind: str) -> int:
        t = t % self.T if self.periodic_time else t
        return 2 * t + (0 if kind == "D" else 1)

    def chain_node(self, j: int, layer: int) -> int:
        return self.layer_offsets[layer] + j

    def ancilla_node(self, i: int, layer: int) -> int:
        return self.layer_offsets[layer] + self.code.n + i

    def describe_node(self, v: int) -> str:
        layer = int(self.node_layer[v])
        tag = f"{layer // 2}{'D' if layer % 2 == 0 else 'P'}"
        if self.node_kind[v] == 0:
            return f"q({self.node_index[v]},{tag})"
        return f"s_{self.layer_type(layer)}({self.node_index[v]},{tag})"

    def chain_neighbors(self, v: int) -> list[int]:
        if self.node_kind[v] != 0:
            return []
        j, layer = int(self.node_index[v]), int(self.node_layer[v])
        out = []
        for other in (layer - 1, layer + 1):
            if self.periodic_time:
                out.append(self.chain_node(j, other % self.n_layers))
            elif 0 <= other < self.n_layers:
                out.append(self.chain_node(j, other))
        if len(out) == 2 and out[0] == out[1]:
            # T = 1 with periodic time: the two CZs coincide and cancel
            return []
        return out

    def fusion_endpoints(self, f: int) -> tuple[int, int]:
        """(chain node, ancilla node) of a fusion."""
        fu = self.fusions[f]
        return self.chain_node(fu.data_qubit, fu.layer), self.ancilla_node(fu.check_index, fu.layer)

    def graph_neighbors(self, v: int) -> list[int]:
        """Neighbours of a node in the target cluster state (all fusions succeeded)."""
        out = self.chain_neighbors(v)
        for f in self.fusions_at[v]:
            a, b = self.fusion_endpoints(f)
            out.append(b if v == a else a)
        return out

    @cached_property
    def fusions_by_layer(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_layers)]
        for fu in self.fusions:
            out[fu.layer].append(fu.id)
        return out


def foliate(code: CssCode, T: int, periodic_time: bool = True) -> FoliatedLattice:
    if T < 1:
        raise ValueError("T must be at least 1")
    n = code.n
    checks = {"X": code.h_x, "Z": code.h_z}
    kinds, index, layers, offsets = [], [], [], []
    fusions: list[Fusion] = []
    for layer in range(2 * T):
        offsets.append(len(kinds))
        H = checks[FoliatedLattice.layer_type(layer)]
        kinds += [0] * n + [1] * H.nrows
        index += list(range(n)) + list(range(H.nrows))
        layers += [layer] * (n + H.nrows)
        for i, row in enumerate(H.rows):
            for j in gf2.support(row):
                fusions.append(
                    Fusion(len(fusions), j, i, FoliatedLattice.layer_type(layer), layer // 2, layer)
                )
    lattice = FoliatedLattice(
        code=code,
        T=T,
        periodic_time=periodic_time,
        fusions=fusions,
        node_kind=np.array(kinds, dtype=np.int8),
        node_index=np.array(index, dtype=np.int64),
        node_layer=np.array(layers, dtype=np.int64),
        layer_offsets=offsets,
        fusions_at=[[] for _ in kinds],
    )
    for fu in fusions:
        a, b = lattice.fusion_endpoints(fu.id)
        lattice.fusions_at[a].append(fu.id)
        lattice.fusions_at[b].append(fu.id)
    return lattice


def detector_cells(lattice: FoliatedLattice, kind: str = "X") -> list[DetectorCell]:
    """Node supports of the X-type (or Z-type) detectors.

    X cell (i, t): ancilla of X check i at t_P, the chain nodes of its qubits
    at (t+1)_D and the ancilla at (t+1)_P.  Z cell (i, t): ancilla of Z check
    i at t_D, its chain nodes at t_P and the ancilla at (t+1)_D.  With open
    time boundaries the last round has no cell.
    """
    code, T = lattice.code, lattice.T
    rounds = range(T) if lattice.periodic_time else range(T - 1)
    out = []
    if kind == "X":
        H, first, middle = code.h_x, "P", "D"
    elif kind == "Z":
        H, first, middle = code.h_z, "D", "P"
    else:
        raise ValueError(f"unknown detector kind {kind!r}")
    for i, row in enumerate(H.rows):
        qubits = gf2.support(row)
        for t in rounds:
            l0 = lattice.layer_of(t, first)
            l1 = lattice.layer_of(t + 1, first)
            lm = lattice.layer_of(t + 1 if kind == "X" else t, middle)
            nodes = [lattice.ancilla_node(i, l0)]
            nodes += [lattice.chain_node(j, lm) for j in qubits]
            nodes.append(lattice.ancilla_node(i, l1))
            out.append(DetectorCell(i, t, kind, tuple(nodes)))
    out.sort(key=lambda c: (c.time, c.check_index))
    return out


# --- decoding problem ---------------------------------------------------------------


@dataclass
class DecodingProblem:
    """GF(2) detector and logical matrices over outcome variables.

    Columns ``0 .. n_fusions-1`` are the fusions' X-lattice bits (column id =
    fusion id); column ``n_fusions + v`` is the X-measurement outcome of
    virtual node ``v``.
    """

    h_det: Gf2Matrix
    logicals: Gf2Matrix
    variable_kinds: list[str]
    fusion_column_of: np.ndarray
    node_column_of: np.ndarray
    fusion_side: list[str]  # which parity of each fusion feeds the X lattice
    detectors: list[DetectorCell]

    @property
    def n_detectors(self) -> int:
        return self.h_det.nrows

    @property
    def n_variables(self) -> int:
        return self.h_det.ncols

    @property
    def k(self) -> int:
        return self.logicals.nrows

    @cached_property
    def n_fusions(self) -> int:
        return len(self.fusion_column_of)

    @cached_property
    def h_sparse(self) -> sp.csr_matrix:
        return _to_sparse(self.h_det)

    @cached_property
    def logicals_sparse(self) -> sp.csr_matrix:
        return _to_sparse(self.logicals)

    @cached_property
    def column_supports(self) -> list[int]:
        """Column bitsets over detectors."""
        return list(self.h_det.transpose().rows)

    @cached_property
    def logical_columns(self) -> list[int]:
        """Column bitsets over logicals."""
        return list(self.logicals.transpose().rows)

    def syndrome(self, error: np.ndarray) -> np.ndarray:
        return (self.h_sparse @ error.astype(np.int32)) & 1

    def logical_parities(self, error: np.ndarray) -> np.ndarray:
        return (self.logicals_sparse @ error.astype(np.int32)) & 1


def _to_sparse(M: Gf2Matrix) -> sp.csr_matrix:
    indptr, indices = [0], []
    for r in M.rows:
        indices += gf2.support(r)
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.int32)
    return sp.csr_matrix((data, indices, indptr), shape=M.shape)


def _generator_terms(lattice: FoliatedLattice, v: int) -> tuple[set, set]:
    """Outcome variables and Z support of node v's generator after fusion.

    The generator is X_v times Z on v's neighbours in the fused cluster.  Its
    value is the X outcome of v times, for each fusion at v, the fusion
    parity carrying X on the partner's leaf and Z on v's leaf.
    """
    side = DATA_SIDE if lattice.node_kind[v] == 0 else ANCILLA_SIDE
    variables = {("node", v)} | {("fusion", f, side) for f in lattice.fusions_at[v]}
    return variables, set(lattice.graph_neighbors(v))


def _product(lattice: FoliatedLattice, nodes) -> tuple[set, set]:
    variables: set = set()
    zs: set = set()
    for v in nodes:
        terms, z = _generator_terms(lattice, v)
        variables ^= terms
        zs ^= z
    return variables, zs


def build_decoding_problem(lattice: FoliatedLattice) -> DecodingProblem:
    """X-type decoding problem derived by multiplying generators.

    Each detector's node support is turned into a product of fused-cluster
    generators; the Z parts must cancel and the product is read off as a
    parity of fusion bits and virtual X outcomes.  Correlation surfaces for
    the base code's X logicals (chain nodes of every dual layer) are handled
    the same way.
    """
    from .codes import logical_operators

    cells = detector_cells(lattice, "X")
    n_f = len(lattice.fusions)
    fusion_side: list[str | None] = [None] * n_f

    def to_columns(variables) -> list[int]:
        cols = []
        for term in variables:
            if term[0] == "node":
                cols.append(n_f + term[1])
            else:
                _, f, side = term
                if fusion_side[f] not in (None, side):
                    raise ConsistencyError(
                        f"fusion {f} enters the X lattice through both of its parities"
                    )
                fusion_side[f] = side
                cols.append(f)
        return sorted(cols)

    rows = []
    for cell in cells:
        variables, zs = _product(lattice, cell.support)
        if zs:
            names = ", ".join(lattice.describe_node(v) for v in sorted(zs)[:4])
            raise ConsistencyError(
                f"X detector ({cell.check_index},{cell.time}) leaves Z support on {names}"
            )
        rows.append(to_columns(variables))

    logical_rows = []
    base = logical_operators(lattice.code).x_logicals
    for r in base.rows:
        nodes = [
            lattice.chain_node(j, lattice.layer_of(t, "D"))
            for t in range(lattice.T)
            for j in gf2.support(r)
        ]
        variables, zs = _product(lattice, nodes)
        if zs and lattice.periodic_time:
            raise ConsistencyError("correlation surface is not closed")
        logical_rows.append(to_columns(variables))

    ncols = n_f + lattice.n_nodes
    h_det = Gf2Matrix.from_supports(rows, ncols)
    used = 0
    for r in h_det.rows:
        used |= r
    if lattice.periodic_time:
        missing = [f for f in range(n_f) if not (used >> f) & 1]
        if missing:
            raise ConsistencyError(f"{len(missing)} fusion bits appear in no detector")

    kinds = [FUSION_BIT] * n_f + [
        VIRTUAL_CHAIN if k == 0 else VIRTUAL_ANCILLA for k in lattice.node_kind
    ]
    return DecodingProblem(
        h_det=h_det,
        logicals=Gf2Matrix.from_supports(logical_rows, ncols),
        variable_kinds=kinds,
        fusion_column_of=np.arange(n_f),
        node_column_of=n_f + np.arange(lattice.n_nodes),
        fusion_side=[s or ANCILLA_SIDE for s in fusion_side],
        detectors=cells,
    )


# --- resource inventory -------------------------------------------------------------


@dataclass
class InventoryReport:
    n_chains: int
    chain_length: int
    leaves_per_chain_node: dict[int, int]
    n_ghz: int
    ghz_sizes: dict[int, int]
    n_fusions: int
    n_fusion_photons: int

    def summary(self) -> str:
        leaves = ",".join(f"{k}x{v}" for k, v in self.leaves_per_chain_node.items())
        ghz = ",".join(f"{k}x{v}" for k, v in self.ghz_sizes.items())
        return (
            f"chains={self.n_chains} length={self.chain_length} leaves/node={{{leaves}}} "
            f"ghz={self.n_ghz} ghz_sizes={{{ghz}}} fusions={self.n_fusions}"
        )


def resource_inventory(lattice: FoliatedLattice) -> InventoryReport:
    leaves = Counter()
    ghz = Counter()
    for v in range(lattice.n_nodes):
        count = len(lattice.fusions_at[v])
        if lattice.node_kind[v] == 0:
            leaves[count] += 1
        else:
            ghz[count] += 1
    return InventoryReport(
        n_chains=lattice.code.n,
        chain_length=lattice.n_layers,
        leaves_per_chain_node=dict(sorted(leaves.items())),
        n_ghz=sum(ghz.values()),
        ghz_sizes=dict(sorted(ghz.items())),
        n_fusions=len(lattice.fusions),
        n_fusion_photons=2 * len(lattice.fusions),
    )


def export_lattice(lattice: FoliatedLattice, problem: DecodingProblem, path: str | Path) -> None:
    """Dump nodes, fusions, detector rows and logical rows as JSON."""
    data = {
        "code": str(lattice.code),
        "T": lattice.T,
        "periodic_time": lattice.periodic_time,
        "nodes": [
            {"id": v, "label": lattice.describe_node(v), "layer": int(lattice.node_layer[v])}
            for v in range(lattice.n_nodes)
        ],
        "fusions": [
            {
                "id": fu.id,
                "data_qubit": fu.data_qubit,
                "check": fu.check_index,
                "type": fu.check_type,
                "layer": fu.layer,
                "x_lattice_bit": problem.fusion_side[fu.id],
            }
            for fu in lattice.fusions
        ],
        "n_variables": problem.n_variables,
        "detector_rows": [problem.h_det.row_support(i) for i in range(problem.n_detectors)],
        "logical_rows": [problem.logicals.row_support(i) for i in range(problem.k)],
    }
    Path(path).write_text(json.dumps(data))
