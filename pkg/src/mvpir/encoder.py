"""Database as the sparse polynomial F(x) = Σ a_i x^{u_i} over R_{m,r}.

Evaluating at γ^w only needs the exponents s_i = <w, u_i> mod m: the term
a_i x^{u_i} becomes a_i γ^{s_i}, i.e. ``a_i`` added into coefficient slot
s_i mod r.  The derivative-like operators scale each term by u_i (first
order) or u_i ⊗ u_i (second order) before doing the same.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError
from .family import MVFamily
from .ring import RingElem


@dataclass(frozen=True)
class EncodedDatabase:
    m: int
    r: int
    k: int
    n: int
    terms: tuple[tuple[int, tuple[int, ...]], ...]
    _a: np.ndarray = field(init=False, repr=False, compare=False)
    _U: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = tuple((int(a) % self.m, tuple(int(x) % self.m for x in u)) for a, u in self.terms)
        if any(len(u) != self.k for _, u in terms):
            raise ParameterError(f"exponent vectors must have {self.k} coordinates")
        terms = tuple(t for t in terms if t[0])
        object.__setattr__(self, "terms", terms)
        a = np.array([t[0] for t in terms], dtype=np.int64)
        U = np.array([t[1] for t in terms], dtype=np.int64).reshape(len(terms), self.k)
        object.__setattr__(self, "_a", a)
        object.__setattr__(self, "_U", U)

    def first_order_terms(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Terms of F^(1) as (coefficient vector a_i·u_i, monomial exponent u_i), unreduced."""
        return [(tuple(a * x for x in u), u) for a, u in self.terms]

    def second_order_terms(self):
        """Terms of F^(2) as (k x k coefficient matrix a_i·u_i⊗u_i, exponent u_i), unreduced."""
        return [(tuple(tuple(a * x * y for y in u) for x in u), u) for a, u in self.terms]

    def _exponents(self, w: Sequence[int]) -> np.ndarray:
        if len(w) != self.k:
            raise ParameterError(f"evaluation point needs {self.k} coordinates, got {len(w)}")
        return (self._U @ np.asarray(w, dtype=np.int64)) % self.m % self.r


def encode(symbols: Sequence[int], family: MVFamily, r: Optional[int] = None) -> EncodedDatabase:
    """Attach symbol i to the monomial x^{u_i}; zero symbols are dropped."""
    if len(symbols) > family.n:
        raise ParameterError(
            f"database has {len(symbols)} symbols but the family only has {family.n} vectors")
    r = family.m if r is None else r
    terms = tuple((int(a), family.U[i]) for i, a in enumerate(symbols) if int(a) % family.m)
    return EncodedDatabase(family.m, r, family.k, len(symbols), terms)


def eval_f(db: EncodedDatabase, w: Sequence[int]) -> RingElem:
    """F(γ^w) = Σ a_i γ^{<w,u_i>}."""
    s = db._exponents(w)
    out = np.zeros(db.r, dtype=np.int64)
    np.add.at(out, s, db._a)
    return RingElem(tuple(out.tolist()), db.m)


def eval_f1(db: EncodedDatabase, w: Sequence[int]) -> tuple[RingElem, ...]:
    """F^(1)(γ^w); coordinate j is Σ a_i (u_i)_j γ^{<w,u_i>}."""
    s = db._exponents(w)
    out = np.zeros((db.r, db.k), dtype=np.int64)
    np.add.at(out, s, db._a[:, None] * db._U)
    out %= db.m
    return tuple(RingElem(tuple(col), db.m) for col in out.T.tolist())


def eval_f2(db: EncodedDatabase, w: Sequence[int]) -> tuple[tuple[RingElem, ...], ...]:
    """F^(2)(γ^w); entry (j, l) is Σ a_i (u_i)_j (u_i)_l γ^{<w,u_i>}."""
    s = db._exponents(w)
    k = db.k
    weights = db._a[:, None, None] * db._U[:, :, None] * db._U[:, None, :]
    out = np.zeros((db.r, k, k), dtype=np.int64)
    np.add.at(out, s, weights % db.m)
    out %= db.m
    return tuple(
        tuple(RingElem(tuple(out[:, j, l].tolist()), db.m) for l in range(k)) for j in range(k)
    )


@dataclass(frozen=True)
class AnswerBundle:
    """One server's reply: F, F^(1) and (second-order variant only) F^(2) at its point."""

    f0: RingElem
    f1: tuple[RingElem, ...]
    f2: Optional[tuple[tuple[RingElem, ...], ...]] = None

    @property
    def k(self) -> int:
        return len(self.f1)

    def elements(self) -> list[RingElem]:
        out = [self.f0, *self.f1]
        if self.f2 is not None:
            out.extend(e for row in self.f2 for e in row)
        return out

    def map(self, fn) -> AnswerBundle:
        f2 = None if self.f2 is None else tuple(tuple(fn(e) for e in row) for row in self.f2)
        return AnswerBundle(fn(self.f0), tuple(fn(e) for e in self.f1), f2)

    def to_bytes(self) -> bytes:
        return b"".join(e.to_bytes() for e in self.elements())

    @classmethod
    def from_bytes(cls, data: bytes, k: int, m: int, r: int, order: int = 1) -> AnswerBundle:
        count = 1 + k + (k * k if order == 2 else 0)
        if len(data) != count * r:
            raise ParameterError(f"answer body must be {count * r} bytes, got {len(data)}")
        elems = [RingElem.from_bytes(data[i * r:(i + 1) * r], m) for i in range(count)]
        f2 = None
        if order == 2:
            flat = elems[1 + k:]
            f2 = tuple(tuple(flat[j * k:(j + 1) * k]) for j in range(k))
        return cls(elems[0], tuple(elems[1:1 + k]), f2)
