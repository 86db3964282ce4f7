"""CSS code constructions: Bivariate Bicycle codes, Toric codes, file input."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gf2
from .gf2 import EchelonBasis, Gf2Matrix


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class BBCodeSpec:
    """Bivariate Bicycle code from polynomials in x = S_l⊗I_m and y = I_l⊗S_m.

    Each term is an exponent pair ``(a, b)`` standing for the monomial x^a y^b.
    """

    l: int
    m: int
    a_terms: tuple[tuple[int, int], ...]
    b_terms: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise CodeError("l and m must be positive")
        reduce = lambda terms: tuple((int(a) % self.l, int(b) % self.m) for a, b in terms)
        object.__setattr__(self, "a_terms", reduce(self.a_terms))
        object.__setattr__(self, "b_terms", reduce(self.b_terms))

    def shifted(self, dx: int = 1, dy: int = 0) -> BBCodeSpec:
        """Multiply both polynomials by the monomial x^dx y^dy."""
        shift = lambda terms: tuple((a + dx, b + dy) for a, b in terms)
        return BBCodeSpec(self.l, self.m, shift(self.a_terms), shift(self.b_terms))

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "m": self.m,
            "a_terms": [list(t) for t in self.a_terms],
            "b_terms": [list(t) for t in self.b_terms],
        }

    @classmethod
    def from_dict(cls, data: dict) -> BBCodeSpec:
        try:
            return cls(
                int(data["l"]),
                int(data["m"]),
                tuple(tuple(t) for t in data["a_terms"]),
                tuple(tuple(t) for t in data["b_terms"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CodeError(f"malformed BB spec: {exc}") from None


@dataclass(frozen=True)
class CssCode:
    h_x: Gf2Matrix
    h_z: Gf2Matrix
    name: str = ""
    # known distance, used only as a default for the number of rounds
    distance: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.h_x.ncols != self.h_z.ncols:
            raise CodeError(
                f"H_X has {self.h_x.ncols} columns but H_Z has {self.h_z.ncols}"
            )

    @property
    def n(self) -> int:
        return self.h_x.ncols

    @cached_property
    def k(self) -> int:
        return self.n - gf2.rank(self.h_x) - gf2.rank(self.h_z)

    @cached_property
    def qubit_degree(self) -> int | None:
        """Number of checks (X plus Z) per qubit, if constant."""
        degs = {a + b for a, b in zip(self.h_x.col_weights(), self.h_z.col_weights())}
        return degs.pop() if len(degs) == 1 else None

    @cached_property
    def check_degree(self) -> int | None:
        degs = set(self.h_x.row_weights()) | set(self.h_z.row_weights())
        return degs.pop() if len(degs) == 1 else None

    @cached_property
    def x_checks_of_qubit(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(gf2.support(c)) for c in self.h_x.transpose().rows)

    @cached_property
    def z_checks_of_qubit(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(gf2.support(c)) for c in self.h_z.transpose().rows)

    def __str__(self) -> str:
        label = self.name or "css"
        return f"{label}[[{self.n},{self.k}]]"


def _shift_matrix(size: int, power: int) -> np.ndarray:
    return np.roll(np.eye(size, dtype=np.uint8), power % size, axis=1)


def _bb_polynomial(spec: BBCodeSpec, terms) -> np.ndarray:
    total = np.zeros((spec.l * spec.m, spec.l * spec.m), dtype=np.uint8)
    for a, b in terms:
        total ^= np.kron(_shift_matrix(spec.l, a), _shift_matrix(spec.m, b))
    return total


def build_bb_code(spec: BBCodeSpec, name: str = "", distance: int | None = None) -> CssCode:
    A = _bb_polynomial(spec, spec.a_terms)
    B = _bb_polynomial(spec, spec.b_terms)
    h_x = Gf2Matrix.from_dense(np.hstack([A, B]))
    h_z = Gf2Matrix.from_dense(np.hstack([B.T, A.T]))
    return CssCode(h_x, h_z, name=name or f"bb_{spec.l}x{spec.m}", distance=distance)


def build_toric_code(L: int) -> CssCode:
    """Toric code with qubits on edges, X checks on vertices, Z checks on plaquettes.

    Horizontal edge (r, c) joins vertices (r, c) and (r, c+1) and has index
    r*L + c; vertical edge (r, c) joins (r, c) and (r+1, c), index L² + r*L + c.
    """
    if L < 2:
        raise CodeError("Toric code needs L >= 2")
    h = lambda r, c: (r % L) * L + (c % L)
    v = lambda r, c: L * L + (r % L) * L + (c % L)
    x_checks, z_checks = [], []
    for r in range(L):
        for c in range(L):
            x_checks.append([h(r, c), h(r, c - 1), v(r, c), v(r - 1, c)])
            z_checks.append([h(r, c), h(r + 1, c), v(r, c), v(r, c + 1)])
    n = 2 * L * L
    return CssCode(
        Gf2Matrix.from_supports(x_checks, n),
        Gf2Matrix.from_supports(z_checks, n),
        name=f"toric_{L}",
        distance=L,
    )


NAMED_BB_CODES: dict[str, tuple[BBCodeSpec, int]] = {
    "bb72": (BBCodeSpec(6, 6, ((3, 0), (0, 1), (0, 2)), ((0, 3), (1, 0), (2, 0))), 6),
    "bb90": (BBCodeSpec(15, 3, ((9, 0), (0, 1), (0, 2)), ((0, 0), (2, 0), (7, 0))), 10),
    "bb108": (BBCodeSpec(9, 6, ((3, 0), (0, 1), (0, 2)), ((0, 3), (1, 0), (2, 0))), 10),
    "bb144": (BBCodeSpec(12, 6, ((3, 0), (0, 1), (0, 2)), ((0, 3), (1, 0), (2, 0))), 12),
}


def named_code(name: str) -> CssCode:
    """Look up ``bb72``/``bb90``/``bb108``/``bb144`` or ``toric<L>``."""
    if name in NAMED_BB_CODES:
        spec, d = NAMED_BB_CODES[name]
        return build_bb_code(spec, name=name, distance=d)
    if name.startswith("toric"):
        try:
            return build_toric_code(int(name[5:].lstrip("_")))
        except ValueError:
            pass
    raise CodeError(f"unknown code {name!r}")


# --- validation ----------------------------------------------------------------


@dataclass
class ValidationReport:
    n: int
    k: int
    commutes: bool
    violations: list[tuple[int, int]]
    x_row_weights: dict[int, int]
    z_row_weights: dict[int, int]
    x_col_weights: dict[int, int]
    z_col_weights: dict[int, int]

    @property
    def ok(self) -> bool:
        return self.commutes and self.k > 0

    def summary(self) -> str:
        status = "ok" if self.commutes else f"FAIL ({len(self.violations)} pairs)"
        return f"n={self.n} k={self.k} commutation={status}"


def validate(code: CssCode) -> ValidationReport:
    violations = []
    for i, rx in enumerate(code.h_x.rows):
        for j, rz in enumerate(code.h_z.rows):
            if (rx & rz).bit_count() & 1:
                violations.append((i, j))
    hist = lambda ws: dict(sorted(Counter(ws).items()))
    return ValidationReport(
        n=code.n,
        k=code.k,
        commutes=not violations,
        violations=violations,
        x_row_weights=hist(code.h_x.row_weights()),
        z_row_weights=hist(code.h_z.row_weights()),
        x_col_weights=hist(code.h_x.col_weights()),
        z_col_weights=hist(code.h_z.col_weights()),
    )


# --- logical operators -------------------------------------------------------------


@dataclass(frozen=True)
class LogicalBasis:
    x_logicals: Gf2Matrix
    z_logicals: Gf2Matrix


def _independent_mod(candidates: Sequence[int], modulo: Gf2Matrix, count: int) -> list[int]:
    basis = EchelonBasis()
    for r in modulo.rows:
        basis.add(r)
    chosen = []
    for v in candidates:
        if len(chosen) == count:
            break
        if basis.add(v):
            chosen.append(v)
    return chosen


def logical_operators(code: CssCode) -> LogicalBasis:
    """Deterministic logical representatives.

    X logicals come from the kernel of H_Z, kept greedily when independent of
    the row space of H_X; Z logicals symmetrically.
    """
    k = code.k
    if k <= 0:
        raise CodeError(f"code encodes k={k} logical qubits")
    xs = _independent_mod(gf2.nullspace_basis(code.h_z), code.h_x, k)
    zs = _independent_mod(gf2.nullspace_basis(code.h_x), code.h_z, k)
    if len(xs) != k or len(zs) != k:
        raise CodeError("could not find k independent logical operators")
    return LogicalBasis(Gf2Matrix(tuple(xs), code.n), Gf2Matrix(tuple(zs), code.n))


def distance_upper_bound(
    code: CssCode,
    effort: int = 200,
    rng: np.random.Generator | int | None = None,
    target: int | None = None,
) -> int:
    """Smallest logical weight found by random information-set sampling.

    Each iteration row-reduces the kernel of H_Z (resp. H_X) with pivots
    searched in a random column order; every reduced row is a low-weight
    codeword, kept if it acts nontrivially on the logical space.  Both Pauli
    types are searched.  The result is never below the true distance.
    Stops early once ``target`` is reached.
    """
    rng = np.random.default_rng(rng)
    logicals = logical_operators(code)
    sides = [
        (gf2.nullspace_basis(code.h_z), logicals.z_logicals.rows),
        (gf2.nullspace_basis(code.h_x), logicals.x_logicals.rows),
    ]
    best = min(r.bit_count() for r in logicals.x_logicals.rows + logicals.z_logicals.rows)
    n = code.n
    for it in range(effort):
        kernel, dual = sides[it % 2]
        order = rng.permutation(n).tolist()
        reduced, _ = gf2.rref(kernel, n, order)
        for row in reduced:
            w = row.bit_count()
            if w < best and any((row & d).bit_count() & 1 for d in dual):
                best = w
        if target is not None and best <= target:
            break
    return best


# --- file input ------------------------------------------------------------------


def load_code(path: str | Path) -> CssCode:
    """Read H_X then H_Z in the text matrix format, separated by a blank line."""
    path = Path(path)
    try:
        mats = gf2.parse_matrices(path.read_text())
    except ValueError as exc:
        raise CodeError(f"{path}: {exc}") from None
    if len(mats) != 2:
        raise CodeError(f"{path}: expected two matrices (H_X, H_Z), found {len(mats)}")
    h_x, h_z = mats
    if h_x.ncols != h_z.ncols:
        raise CodeError(f"{path}: H_X has {h_x.ncols} columns, H_Z has {h_z.ncols}")
    code = CssCode(h_x, h_z, name=path.stem)
    report = validate(code)
    if not report.commutes:
        i, j = report.violations[0]
        raise CodeError(f"{path}: X check {i} anticommutes with Z check {j}")
    return code


def save_code(code: CssCode, path: str | Path) -> None:
    Path(path).write_text(gf2.format_matrix(code.h_x) + "\n" + gf2.format_matrix(code.h_z))


def load_bb_spec(path: str | Path) -> BBCodeSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CodeError(f"{path}: {exc}") from None
    return BBCodeSpec.from_dict(data)
