"""Bit-packed linear algebra over GF(2).

Vectors are Python ints used as bitsets: bit ``j`` of an int is entry ``j``.
Matrices store one such int per row.  XOR on ints runs word-at-a-time in C,
which keeps elimination fast without a compiled extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def to_bits(vec: int, length: int) -> np.ndarray:
    """Unpack an int bitset into a uint8 array of the given length."""
    out = np.zeros(length, dtype=np.uint8)
    while vec:
        low = vec & -vec
        out[low.bit_length() - 1] = 1
        vec ^= low
    return out


def from_bits(bits: Sequence[int] | np.ndarray) -> int:
    """Pack a 0/1 sequence into an int bitset."""
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size == 0:
        return 0
    packed = np.packbits(arr, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def support(vec: int) -> list[int]:
    """Indices of the set bits, ascending."""
    out = []
    while vec:
        low = vec & -vec
        out.append(low.bit_length() - 1)
        vec ^= low
    return out


def from_support(indices: Iterable[int]) -> int:
    vec = 0
    for i in indices:
        vec ^= 1 << i
    return vec


def parity(vec: int) -> int:
    return vec.bit_count() & 1


@dataclass(frozen=True)
class Gf2Matrix:
    """Immutable binary matrix with row-major bit-packed storage."""

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self):
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise ValueError("row has bits outside the column range")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.ncols)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> Gf2Matrix:
        return cls((0,) * nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> Gf2Matrix:
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def from_dense(cls, array) -> Gf2Matrix:
        arr = np.asarray(array, dtype=np.uint8) & 1
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(tuple(from_bits(row) for row in arr), arr.shape[1])

    @classmethod
    def from_supports(cls, supports: Iterable[Iterable[int]], ncols: int) -> Gf2Matrix:
        return cls(tuple(from_support(s) for s in supports), ncols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for i, r in enumerate(self.rows):
            out[i] = to_bits(r, self.ncols)
        return out

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        return (self.rows[i] >> j) & 1

    def row_support(self, i: int) -> list[int]:
        return support(self.rows[i])

    def transpose(self) -> Gf2Matrix:
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            bit = 1 << i
            for j in support(r):
                cols[j] |= bit
        return Gf2Matrix(tuple(cols), self.nrows)

    def matvec(self, vec: int) -> int:
        """Return M·vec as a bitset over rows."""
        out = 0
        for i, r in enumerate(self.rows):
            if (r & vec).bit_count() & 1:
                out |= 1 << i
        return out

    def __matmul__(self, other: Gf2Matrix) -> Gf2Matrix:
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for r in self.rows:
            acc = 0
            for j in support(r):
                acc ^= other.rows[j]
            out.append(acc)
        return Gf2Matrix(tuple(out), other.ncols)

    def hstack(self, other: Gf2Matrix) -> Gf2Matrix:
        if self.nrows != other.nrows:
            raise ValueError("row count mismatch")
        shift = self.ncols
        return Gf2Matrix(
            tuple(a | (b << shift) for a, b in zip(self.rows, other.rows)),
            self.ncols + other.ncols,
        )

    def vstack(self, other: Gf2Matrix) -> Gf2Matrix:
        if self.ncols != other.ncols:
            raise ValueError("column count mismatch")
        return Gf2Matrix(self.rows + other.rows, self.ncols)

    def row_weights(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def col_weights(self) -> list[int]:
        return self.transpose().row_weights()

    def is_zero(self) -> bool:
        return not any(self.rows)


class EchelonBasis:
    """Incrementally maintained echelon basis of bitset vectors.

    Each stored vector is keyed by its lowest set bit, which no other stored
    vector shares.  Vectors carry a ``tag`` bitset recording which inserted
    inputs they combine, so a successful reduction also yields coefficients.
    """

    __slots__ = ("pivots",)

    def __init__(self):
        self.pivots: dict[int, tuple[int, int]] = {}

    def __len__(self) -> int:
        return len(self.pivots)

    def copy(self) -> EchelonBasis:
        out = EchelonBasis()
        out.pivots = dict(self.pivots)
        return out

    def reduce(self, vec: int, tag: int = 0) -> tuple[int, int]:
        """Reduce ``vec`` against the basis; returns (residual, tag)."""
        pivots = self.pivots
        while vec:
            low = vec & -vec
            hit = pivots.get(low)
            if hit is None:
                break
            vec ^= hit[0]
            tag ^= hit[1]
        return vec, tag

    def reduce_full(self, vec: int, tag: int = 0) -> tuple[int, int]:
        """Reduce every reducible bit, not just the leading run."""
        pivots = self.pivots
        rest = vec
        while rest:
            low = rest & -rest
            rest ^= low
            hit = pivots.get(low)
            if hit is not None:
                vec ^= hit[0]
                tag ^= hit[1]
                rest = vec & ~((low << 1) - 1)
        return vec, tag

    def add(self, vec: int, tag: int = 0) -> bool:
        """Insert a vector; returns False if it was already in the span."""
        vec, tag = self.reduce(vec, tag)
        if not vec:
            return False
        self.pivots[vec & -vec] = (vec, tag)
        return True

    def contains(self, vec: int) -> bool:
        return self.reduce(vec)[0] == 0


def rref(rows: Sequence[int], ncols: int, column_order: Sequence[int] | None = None):
    """Fully reduced row echelon form.

    Returns ``(reduced_rows, pivot_columns)`` with zero rows dropped.  Pivots
    are searched column by column, in ``column_order`` if given.
    """
    work = [r for r in rows if r]
    pivots: list[int] = []
    order = range(ncols) if column_order is None else column_order
    top = 0
    for col in order:
        if top == len(work):
            break
        bit = 1 << col
        for r in range(top, len(work)):
            if work[r] & bit:
                break
        else:
            continue
        work[top], work[r] = work[r], work[top]
        pivot_row = work[top]
        for r in range(len(work)):
            if r != top and work[r] & bit:
                work[r] ^= pivot_row
        pivots.append(col)
        top += 1
    return work[:top], pivots


def rank(M: Gf2Matrix) -> int:
    basis = EchelonBasis()
    count = 0
    for r in M.rows:
        if basis.add(r):
            count += 1
    return count


def solve(M: Gf2Matrix, b: int, nrows: int | None = None) -> int | None:
    """Find x with M·x = b, or None if the system is inconsistent.

    ``b`` is a bitset over rows.  Free variables are set to zero, so the
    solution is a combination of pivot columns only.
    """
    if nrows is not None and nrows != M.nrows:
        raise ValueError(f"right-hand side has length {nrows}, matrix has {M.nrows} rows")
    if b >> M.nrows:
        raise ValueError("right-hand side has bits beyond the row count")
    basis = EchelonBasis()
    for j, col in enumerate(M.transpose().rows):
        basis.add(col, 1 << j)
    residual, x = basis.reduce(b)
    if residual:
        return None
    return x


def in_rowspace(M: Gf2Matrix, vec: int) -> bool:
    if vec >> M.ncols:
        raise ValueError("vector longer than the column count")
    basis = EchelonBasis()
    for r in M.rows:
        basis.add(r)
    return basis.contains(vec)


def nullspace_basis(M: Gf2Matrix) -> list[int]:
    """Basis of {x : M·x = 0}, one vector per free column in ascending order."""
    reduced, pivots = rref(M.rows, M.ncols)
    pivot_set = set(pivots)
    out = []
    for f in range(M.ncols):
        if f in pivot_set:
            continue
        bit = 1 << f
        vec = bit
        for row, p in zip(reduced, pivots):
            if row & bit:
                vec |= 1 << p
        out.append(vec)
    return out


# --- text format -----------------------------------------------------------


def format_matrix(M: Gf2Matrix) -> str:
    lines = [f"{M.nrows} {M.ncols}"]
    for r in M.rows:
        lines.append("".join("1" if (r >> j) & 1 else "0" for j in range(M.ncols)))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> Gf2Matrix:
    mats = parse_matrices(text)
    if len(mats) != 1:
        raise ValueError(f"expected one matrix, found {len(mats)}")
    return mats[0]


def parse_matrices(text: str) -> list[Gf2Matrix]:
    """Parse one or more matrices separated by blank lines."""
    lines = [ln.strip() for ln in text.splitlines()]
    out = []
    i = 0
    while i < len(lines):
        if not lines[i]:
            i += 1
            continue
        header = lines[i].split()
        if len(header) != 2:
            raise ValueError(f"line {i + 1}: expected 'rows cols', got {lines[i]!r}")
        try:
            nrows, ncols = int(header[0]), int(header[1])
        except ValueError:
            raise ValueError(f"line {i + 1}: non-integer header {lines[i]!r}") from None
        body = lines[i + 1 : i + 1 + nrows]
        if len(body) != nrows:
            raise ValueError(f"line {i + 1}: expected {nrows} rows, file ends early")
        rows = []
        for k, ln in enumerate(body):
            if len(ln) != ncols or set(ln) - {"0", "1"}:
                raise ValueError(f"line {i + 2 + k}: expected {ncols} characters of 0/1")
            rows.append(int(ln[::-1], 2) if ncols else 0)
        out.append(Gf2Matrix(tuple(rows), ncols))
        i += 1 + nrows
    return out


def load_matrix(path: str | Path) -> Gf2Matrix:
    return parse_matrix(Path(path).read_text())


def save_matrix(M: Gf2Matrix, path: str | Path) -> None:
    Path(path).write_text(format_matrix(M))
