"""The classical 2-server scheme with O(n^(1/3)) communication.

Index i is mapped to a weight-3 point φ(i) in {0,1}^k with C(k,3) >= n, and
the database becomes the cubic F(x) = Σ a_i ∏_{j in φ(i)} x_j over F_p.
Server i receives φ(tau) + t_i·z and returns F and ∇F there.  The user
knows g(t) = F(φ(tau) + t z) and g'(t) = <∇F, z> at two nonzero t and
interpolates the cubic g to read off g(0) = a_tau.

Runs in-process only; it exists for cost comparison.
"""

from __future__ import annotations

import itertools
import secrets
from dataclasses import dataclass
from math import comb
from typing import Sequence

from .errors import CapacityError, ParameterError
from .matrix import determinant, recover_scaled_first
from .ring import RingElem
from .schemes import BASELINE, SchemeConfig, build_matrix, make_config


def cube_dimension(n: int) -> int:
    """Smallest k >= 3 with C(k, 3) >= n."""
    k = 3
    while comb(k, 3) < n:
        k += 1
    return k


@dataclass(frozen=True)
class CubicDatabase:
    p: int
    k: int
    bits: tuple[int, ...]
    support: tuple[tuple[int, int, int], ...]

    @property
    def n(self) -> int:
        return len(self.bits)

    def point(self, tau: int) -> tuple[int, ...]:
        pt = [0] * self.k
        for j in self.support[tau]:
            pt[j] = 1
        return tuple(pt)


def cubic_encode(bits: Sequence[int], p: int = 7, k: int | None = None) -> CubicDatabase:
    n = len(bits)
    k = cube_dimension(n) if k is None else k
    if n > comb(k, 3):
        raise CapacityError(f"{n} entries do not fit into C({k},3) = {comb(k, 3)} points")
    if any(b not in (0, 1) for b in bits):
        raise ParameterError("the cubic scheme stores bits")
    support = tuple(itertools.islice(itertools.combinations(range(k), 3), n))
    return CubicDatabase(p, k, tuple(int(b) for b in bits), support)


def cubic_query(cfg: SchemeConfig, db: CubicDatabase, tau: int, rng=None):
    """Return (z, per-server points φ(tau) + t_i z)."""
    if not 0 <= tau < db.n:
        raise ParameterError(f"index {tau} outside [0, {db.n})")
    rng = rng or secrets.SystemRandom()
    p = cfg.m
    z = tuple(rng.randrange(p) for _ in range(db.k))
    base = db.point(tau)
    return z, tuple(tuple((b + t * zj) % p for b, zj in zip(base, z)) for t in cfg.t_values)


def cubic_answer(db: CubicDatabase, x: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """F(x) and the gradient ∇F(x) over F_p."""
    p = db.p
    value = 0
    grad = [0] * db.k
    for a, (i, j, l) in zip(db.bits, db.support):
        if not a:
            continue
        xi, xj, xl = x[i], x[j], x[l]
        value += xi * xj * xl
        grad[i] += xj * xl
        grad[j] += xi * xl
        grad[l] += xi * xj
    return value % p, tuple(g % p for g in grad)


def cubic_reconstruct(cfg: SchemeConfig, z: Sequence[int], answers) -> int:
    p = cfg.m
    b = []
    for value, grad in answers:
        b.append(RingElem.scalar(value, p, 1))
        b.append(RingElem.scalar(sum(g * zj for g, zj in zip(grad, z)), p, 1))
    M = build_matrix(cfg)
    det = determinant(M).coeffs[0]
    scaled = recover_scaled_first(M, b).coeffs[0]
    return scaled * pow(det, -1, p) % p


def encode_query(point: Sequence[int]) -> bytes:
    return bytes(point)


def encode_answer(answer) -> bytes:
    value, grad = answer
    return bytes((value, *grad))


def baseline_roundtrip(db_bits: Sequence[int], tau: int, rng=None, field: int = 7,
                       t_values=(1, 2), k: int | None = None) -> int:
    cfg = make_config(BASELINE, t_values=t_values, field=field)
    db = cubic_encode(db_bits, field, k)
    z, points = cubic_query(cfg, db, tau, rng)
    return cubic_reconstruct(cfg, z, [cubic_answer(db, x) for x in points])
