"""Union-find decoder with Gaussian-elimination cluster validation.

Clusters live on the Tanner graph of the detector matrix.  They are seeded
by erased variables (together with all their detectors) and by non-trivial
detectors.  A cluster is valid when its syndrome can be produced by its own
variables alone; validity is tested by an incrementally maintained echelon
basis of the cluster's columns.  Invalid clusters grow node by node in
breadth-first order, each step adding every variable next to a boundary
detector and then every detector next to those variables, so that cluster
boundaries are always detectors.

Identical columns (same detectors, same logicals) are interchangeable for
decoding, so the decoder works on column classes and maps the result back
to one representative column per class.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .foliation import DecodingProblem
from .gf2 import EchelonBasis


GROWTH_POLICIES = ("invalid", "all")


class DecodingError(RuntimeError):
    pass


class _ColumnClasses:
    """Deduplicated columns of a decoding problem."""

    def __init__(self, problem: DecodingProblem):
        cols = problem.column_supports
        logs = problem.logical_columns
        key_to_class: dict[tuple[int, int], int] = {}
        class_of = np.full(len(cols), -1, dtype=np.int64)
        det, log, members = [], [], []
        for j, (c, l) in enumerate(zip(cols, logs)):
            if not c:
                continue
            key = (c, l)
            cls = key_to_class.get(key)
            if cls is None:
                cls = key_to_class[key] = len(det)
                det.append(c)
                log.append(l)
                members.append([])
            class_of[j] = cls
            members[cls].append(j)
        self.m = problem.n_detectors
        self.k = problem.k
        self.class_of = class_of
        self.det = det
        self.log = log
        self.members = members
        self.checks = [tuple(gf2.support(c)) for c in det]
        adj: list[list[int]] = [[] for _ in range(self.m)]
        for v, cs in enumerate(self.checks):
            for c in cs:
                adj[c].append(v)
        self.check_vars = [tuple(a) for a in adj]
        # columns with empty detector support but nonzero logical support
        self.undetectable_logical = [
            j for j, (c, l) in enumerate(zip(cols, logs)) if not c and l
        ]

    @property
    def n_classes(self) -> int:
        return len(self.det)

    def erased_classes(self, erasures) -> list[int]:
        if len(erasures) == 0:
            return []
        cls = self.class_of[np.asarray(erasures, dtype=np.int64)]
        return np.unique(cls[cls >= 0]).tolist()


def column_classes(problem: DecodingProblem) -> _ColumnClasses:
    hit = problem.__dict__.get("_column_classes")
    if hit is None:
        hit = problem.__dict__["_column_classes"] = _ColumnClasses(problem)
    return hit


@dataclass
class Cluster:
    checks: list[int] = field(default_factory=list)
    variables: list[int] = field(default_factory=list)
    frontier: list[int] = field(default_factory=list)
    basis: EchelonBasis = field(default_factory=EchelonBasis)
    syndrome: int = 0
    valid: bool | None = None
    solution: int = 0

    def check_valid(self) -> bool:
        if self.valid is None:
            residual, tag = self.basis.reduce(self.syndrome)
            self.valid = residual == 0
            self.solution = tag
        return self.valid


class UnionFindDecoder:
    """Decoder bound to one (immutable, shareable) decoding problem."""

    def __init__(self, problem: DecodingProblem, growth: str = "invalid"):
        if growth not in GROWTH_POLICIES:
            raise ValueError(f"growth must be one of {GROWTH_POLICIES}")
        self.problem = problem
        self.growth = growth
        self.classes = column_classes(problem)
        self.last_clusters: list[Cluster] = []
        self.last_rounds = 0

    def decode(self, syndrome, erasures=()) -> np.ndarray:
        """Return a correction e with h_det·e equal to the syndrome."""
        syndrome = np.asarray(syndrome)
        if syndrome.shape != (self.classes.m,):
            raise ValueError(
                f"syndrome has shape {syndrome.shape}, expected ({self.classes.m},)"
            )
        flagged = np.flatnonzero(syndrome).tolist()
        erased = self.classes.erased_classes(erasures)
        classes = self.classes
        m = classes.m
        sbits = gf2.from_support(flagged)
        check_vars, var_checks, var_det = classes.check_vars, classes.checks, classes.det

        parent = [-1] * (m + classes.n_classes)
        clusters: dict[int, Cluster] = {}

        def find(x: int) -> int:
            root = x
            while parent[root] != root:
                root = parent[root]
            while parent[x] != root:
                parent[x], x = root, parent[x]
            return root

        def union(ra: int, rb: int) -> int:
            a, b = clusters[ra], clusters[rb]
            if len(a.checks) + len(a.variables) < len(b.checks) + len(b.variables):
                ra, rb, a, b = rb, ra, b, a
            parent[rb] = ra
            a.checks += b.checks
            a.variables += b.variables
            a.frontier += b.frontier
            a.syndrome |= b.syndrome
            for vec, tag in b.basis.pivots.values():
                a.basis.add(vec, tag)
            a.valid = None
            del clusters[rb]
            return ra

        def add_check(root: int, c: int) -> int:
            owner = parent[c]
            if owner == -1:
                parent[c] = root
                cl = clusters[root]
                cl.checks.append(c)
                cl.frontier.append(c)
                if (sbits >> c) & 1:
                    cl.syndrome |= 1 << c
                    cl.valid = None
                return root
            owner = find(c)
            return root if owner == root else union(root, owner)

        def add_var(root: int, v: int) -> int:
            node = m + v
            if parent[node] == -1:
                parent[node] = root
                cl = clusters[root]
                cl.variables.append(v)
                cl.basis.add(var_det[v], 1 << v)
                cl.valid = None
                for c in var_checks[v]:
                    root = add_check(root, c)
                return root
            owner = find(node)
            return root if owner == root else union(root, owner)

        # erasure clusters first, then non-trivial detectors
        for v in erased:
            node = m + v
            if parent[node] != -1:
                continue
            parent[node] = node
            cl = clusters[node] = Cluster(variables=[v])
            cl.basis.add(var_det[v], 1 << v)
            root = node
            for c in var_checks[v]:
                root = add_check(root, c)
        for c in flagged:
            if parent[c] == -1:
                parent[c] = c
                clusters[c] = Cluster(checks=[c], frontier=[c], syndrome=1 << c)

        rounds = 0
        grow_valid = self.growth == "all"
        while True:
            invalid = {r for r, cl in clusters.items() if not cl.check_valid()}
            if not invalid:
                break
            rounds += 1
            queue = []
            for r in invalid:
                queue += clusters[r].frontier
                clusters[r].frontier = []
            queue.sort()
            if grow_valid:
                rest = []
                for r, cl in clusters.items():
                    if r not in invalid:
                        rest += cl.frontier
                        cl.frontier = []
                queue += sorted(rest)
            if not queue:
                raise DecodingError("cluster growth exhausted the lattice without a valid cluster")
            for c in queue:
                root = find(c)
                cl = clusters[root]
                if cl.check_valid():
                    if not grow_valid:
                        cl.frontier.append(c)
                        continue
                    if not invalid:
                        break
                for v in check_vars[c]:
                    if parent[m + v] == -1 or find(m + v) != root:
                        root = add_var(root, v)
                if grow_valid:
                    invalid = {r for r in invalid if r in clusters}
                    if clusters[root].check_valid():
                        invalid.discard(root)
                    else:
                        invalid.add(root)
            else:
                continue
            # growth stopped early: keep the unprocessed boundary
            for c2 in queue[queue.index(c):]:
                clusters[find(c2)].frontier.append(c2)

        self.last_clusters = list(clusters.values())
        self.last_rounds = rounds
        erased_set = set(np.asarray(erasures, dtype=np.int64).tolist()) if erased else ()
        correction = np.zeros(self.problem.n_variables, dtype=np.uint8)
        for cl in clusters.values():
            for v in gf2.support(cl.solution):
                members = classes.members[v]
                col = next((j for j in members if j in erased_set), members[0])
                correction[col] ^= 1
        return correction


def decode(problem: DecodingProblem, syndrome, erasures=()) -> np.ndarray:
    return UnionFindDecoder(problem).decode(syndrome, erasures)


def logical_flip(
    problem: DecodingProblem, correction: np.ndarray, true_error: np.ndarray
) -> np.ndarray:
    """Which logicals the residual (correction + true error) flips."""
    residual = (np.asarray(correction) ^ np.asarray(true_error)).astype(np.uint8)
    if problem.syndrome(residual).any():
        raise ValueError("residual has a non-trivial syndrome; correction does not match")
    return problem.logical_parities(residual).astype(np.uint8)


def lost_logicals(problem: DecodingProblem, erasures) -> set[int]:
    """Logicals whose value cannot be recovered from the unerased outcomes.

    Logical ℓ is lost when an undetectable error supported on erased columns
    flips it.  Eliminating erased columns over the detectors, every column
    that reduces to zero leaves behind the logical parity of such an error.
    """
    classes = column_classes(problem)
    lost = 0
    basis = EchelonBasis()
    for v in classes.erased_classes(erasures):
        residual, log = basis.reduce(classes.det[v], classes.log[v])
        if residual:
            basis.pivots[residual & -residual] = (residual, log)
        else:
            lost |= log
    erased = set(np.asarray(erasures, dtype=np.int64).tolist())
    for j in classes.undetectable_logical:
        if j in erased:
            lost |= problem.logical_columns[j]
    return set(gf2.support(lost))
