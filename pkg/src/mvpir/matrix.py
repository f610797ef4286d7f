"""Square matrices over R_{m,r}: determinant, adjugate, scaled recovery.

The ring has zero divisors, so elimination-based methods are unsound.
Everything here is division-free cofactor expansion; minors are memoized
by (row set, column set), which keeps an n x n determinant at O(n 2^n)
ring multiplications instead of O(n!).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ParameterError
from .ring import RingElem


@dataclass(frozen=True)
class RingMatrix:
    rows: tuple[tuple[RingElem, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.rows)
        n = len(rows)
        if n == 0:
            raise ParameterError("empty matrix")
        if any(len(row) != n for row in rows):
            raise ParameterError("matrix is not square")
        ring = (rows[0][0].m, rows[0][0].r)
        if any((e.m, e.r) != ring for row in rows for e in row):
            raise ParameterError("matrix entries come from different rings")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def ring(self) -> tuple[int, int]:
        e = self.rows[0][0]
        return e.m, e.r

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @classmethod
    def identity(cls, n: int, m: int, r: int) -> RingMatrix:
        one, zero = RingElem.one(m, r), RingElem.zero(m, r)
        return cls(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @classmethod
    def from_ints(cls, rows: Sequence[Sequence[int]], m: int, r: int = 1) -> RingMatrix:
        return cls(tuple(tuple(RingElem.scalar(x, m, r) for x in row) for row in rows))

    def __matmul__(self, other: RingMatrix) -> RingMatrix:
        n = self.n
        if other.n != n:
            raise ParameterError("dimension mismatch")
        m, r = self.ring
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = RingElem.zero(m, r)
                for l in range(n):
                    acc = acc + self.rows[i][l] * other.rows[l][j]
                row.append(acc)
            out.append(tuple(row))
        return RingMatrix(tuple(out))

    def apply(self, vec: Sequence[RingElem]) -> tuple[RingElem, ...]:
        """Matrix-vector product M·vec."""
        if len(vec) != self.n:
            raise ParameterError("vector length does not match matrix")
        m, r = self.ring
        return tuple(sum((a * b for a, b in zip(row, vec)), RingElem.zero(m, r)) for row in self.rows)

    def left_apply(self, vec: Sequence[RingElem]) -> tuple[RingElem, ...]:
        """Row-vector product vec·M."""
        if len(vec) != self.n:
            raise ParameterError("vector length does not match matrix")
        m, r = self.ring
        return tuple(
            sum((vec[i] * self.rows[i][j] for i in range(self.n)), RingElem.zero(m, r))
            for j in range(self.n)
        )

    def scale(self, c: RingElem) -> RingMatrix:
        return RingMatrix(tuple(tuple(c * e for e in row) for row in self.rows))

    def map(self, fn: Callable[[RingElem], RingElem]) -> RingMatrix:
        return RingMatrix(tuple(tuple(fn(e) for e in row) for row in self.rows))

    def swap_rows(self, i: int, j: int) -> RingMatrix:
        rows = list(self.rows)
        rows[i], rows[j] = rows[j], rows[i]
        return RingMatrix(tuple(rows))


class _Minors:
    """Memoized determinants of submatrices of one fixed matrix."""

    def __init__(self, M: RingMatrix):
        self.M = M
        self.cache: dict[tuple[tuple[int, ...], tuple[int, ...]], RingElem] = {}
        self.one = RingElem.one(*M.ring)
        self.zero = RingElem.zero(*M.ring)

    def det(self, rows: tuple[int, ...], cols: tuple[int, ...]) -> RingElem:
        if not rows:
            return self.one
        key = (rows, cols)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        top, rest = rows[0], rows[1:]
        acc = self.zero
        for pos, c in enumerate(cols):
            entry = self.M.rows[top][c]
            if entry.is_zero():
                continue
            term = entry * self.det(rest, cols[:pos] + cols[pos + 1:])
            acc = acc - term if pos % 2 else acc + term
        self.cache[key] = acc
        return acc

    def cofactor(self, i: int, j: int) -> RingElem:
        n = self.M.n
        rows = tuple(x for x in range(n) if x != i)
        cols = tuple(x for x in range(n) if x != j)
        minor = self.det(rows, cols)
        return -minor if (i + j) % 2 else minor


def determinant(M: RingMatrix) -> RingElem:
    rng = tuple(range(M.n))
    return _Minors(M).det(rng, rng)


def adjugate(M: RingMatrix) -> RingMatrix:
    """Classical adjoint: entry (i, j) is the (j, i) cofactor."""
    minors = _Minors(M)
    n = M.n
    return RingMatrix(tuple(tuple(minors.cofactor(j, i) for j in range(n)) for i in range(n)))


def adjugate_first_row(M: RingMatrix) -> tuple[RingElem, ...]:
    minors = _Minors(M)
    return tuple(minors.cofactor(j, 0) for j in range(M.n))


def recover_scaled_first(M: RingMatrix, b: Sequence[RingElem]) -> RingElem:
    """Return det(M)·a_1 given b = M·a, without knowing a.

    Only the first row of adj(M) is formed.  The result is zero exactly when
    a_1 is zero, provided det(M) != 0 and a_1 is either zero or a non-zero-divisor.
    """
    if len(b) != M.n:
        raise ParameterError(f"expected {M.n} values, got {len(b)}")
    return dot(adjugate_first_row(M), b)


def dot(row: Sequence[RingElem], vec: Sequence[RingElem]) -> RingElem:
    acc = RingElem.zero(row[0].m, row[0].r)
    for a, b in zip(row, vec):
        acc = acc + a * b
    return acc
