"""Arithmetic in Z_m and in the group ring R_{m,r} = Z_m[γ]/(γ^r - 1).

An element of R_{m,r} is stored as its r coefficients, index ℓ holding the
coefficient of γ^ℓ, always reduced to canonical residues in [0, m).  With
that normalization an element is zero exactly when every stored coefficient
is zero, so equality and zero tests are plain tuple comparisons.

Univariate polynomials over R_{m,r} (``RingPoly``) are needed only for the
Chinese-remainder lifting used by the multi-server scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, prod
from typing import Iterable, Sequence

from .errors import ParameterError

MAX_MODULUS = 255


def crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    """Combine ``x = residues[i] mod moduli[i]`` into one residue mod prod(moduli)."""
    if len(residues) != len(moduli):
        raise ParameterError("residues and moduli differ in length")
    for i, a in enumerate(moduli):
        for b in moduli[i + 1:]:
            if gcd(a, b) != 1:
                raise ParameterError(f"moduli {a} and {b} are not coprime")
    total = prod(moduli)
    x = 0
    for a, p in zip(residues, moduli):
        rest = total // p
        x += a * rest * pow(rest, -1, p)
    return x % total


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def prime_factors(m: int) -> list[int]:
    """Distinct prime factors of ``m`` in increasing order."""
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


@dataclass(frozen=True)
class RingElem:
    """Element of R_{m,r}; ``coeffs[ℓ]`` is the coefficient of γ^ℓ."""

    coeffs: tuple[int, ...]
    m: int

    def __post_init__(self):
        if not 2 <= self.m <= MAX_MODULUS:
            raise ParameterError(f"modulus must lie in [2, {MAX_MODULUS}], got {self.m}")
        if len(self.coeffs) == 0:
            raise ParameterError("a ring element needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(int(c) % self.m for c in self.coeffs))

    @property
    def r(self) -> int:
        return len(self.coeffs)

    @classmethod
    def zero(cls, m: int, r: int) -> RingElem:
        return cls((0,) * r, m)

    @classmethod
    def one(cls, m: int, r: int) -> RingElem:
        return cls((1,) + (0,) * (r - 1), m)

    @classmethod
    def scalar(cls, c: int, m: int, r: int) -> RingElem:
        return cls((c,) + (0,) * (r - 1), m)

    def _check(self, other: RingElem):
        if self.m != other.m or self.r != other.r:
            raise ParameterError(
                f"ring mismatch: R_{{{self.m},{self.r}}} vs R_{{{other.m},{other.r}}}"
            )

    def __add__(self, other):
        if isinstance(other, int):
            other = RingElem.scalar(other, self.m, self.r)
        self._check(other)
        return RingElem(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.m)

    __radd__ = __add__

    def __neg__(self):
        return RingElem(tuple(-a for a in self.coeffs), self.m)

    def __sub__(self, other):
        if isinstance(other, int):
            other = RingElem.scalar(other, self.m, self.r)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return RingElem(tuple(a * other for a in self.coeffs), self.m)
        if not isinstance(other, RingElem):
            return NotImplemented
        self._check(other)
        r = self.r
        out = [0] * r
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[(i + j) % r] += a * b
        return RingElem(tuple(out), self.m)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            raise ParameterError("negative powers are not defined")
        result = RingElem.one(self.m, self.r)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def shift(self, t: int) -> RingElem:
        """Multiply by γ^t, which rotates the coefficient vector by t places."""
        r = self.r
        t %= r
        return RingElem(self.coeffs[-t:] + self.coeffs[:-t] if t else self.coeffs, self.m)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def to_bytes(self) -> bytes:
        return bytes(self.coeffs)

    @classmethod
    def from_bytes(cls, data: bytes, m: int) -> RingElem:
        if any(b >= m for b in data):
            raise ParameterError(f"coefficient byte out of range for modulus {m}")
        return cls(tuple(data), m)

    def __str__(self):
        terms = []
        for ell in range(self.r - 1, -1, -1):
            c = self.coeffs[ell]
            if not c:
                continue
            if ell == 0:
                terms.append(str(c))
            else:
                mono = "γ" if ell == 1 else f"γ^{ell}"
                terms.append(mono if c == 1 else f"{c}{mono}")
        return " + ".join(terms) if terms else "0"


def ring_add(a: RingElem, b: RingElem) -> RingElem:
    return a + b


def ring_mul(a: RingElem, b: RingElem) -> RingElem:
    return a * b


def gamma_power(t: int, m: int, r: int) -> RingElem:
    """The monomial γ^t (exponent taken mod r)."""
    coeffs = [0] * r
    coeffs[t % r] = 1
    return RingElem(tuple(coeffs), m)


def is_zero(a: RingElem) -> bool:
    return a.is_zero()


def reduce_mod_prime(a: RingElem, p: int) -> RingElem:
    """Coefficient-wise image of ``a`` in R_{p,r}."""
    if a.m % p:
        raise ParameterError(f"{p} does not divide the modulus {a.m}")
    return RingElem(tuple(c % p for c in a.coeffs), p)


def hom_apply(a: RingElem, image_of_gamma: int, target_modulus: int) -> int:
    """Image of ``a`` under Z_m[γ]/(γ^r-1) -> Z_target sending γ to ``image_of_gamma``.

    The map is a ring homomorphism only when the target modulus divides m and
    the image is an r-th root of unity in Z_target; both are checked.
    """
    if target_modulus < 2 or a.m % target_modulus:
        raise ParameterError(f"target modulus {target_modulus} does not divide {a.m}")
    if pow(image_of_gamma % target_modulus, a.r, target_modulus) != 1 % target_modulus:
        raise ParameterError(
            f"{image_of_gamma} is not an {a.r}-th root of unity mod {target_modulus}"
        )
    total = 0
    power = 1
    for c in a.coeffs:
        total += c * power
        power = power * image_of_gamma % target_modulus
    return total % target_modulus


@dataclass(frozen=True)
class RingPoly:
    """Polynomial in x over R_{m,r}; ``coeffs[j]`` multiplies x^j.

    Trailing zero coefficients are trimmed, so the zero polynomial has an
    empty coefficient tuple and degree -1.
    """

    coeffs: tuple[RingElem, ...]
    m: int
    r: int

    def __post_init__(self):
        cs = list(self.coeffs)
        for c in cs:
            if c.m != self.m or c.r != self.r:
                raise ParameterError("polynomial coefficient from a different ring")
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, j: int) -> RingElem:
        if 0 <= j < len(self.coeffs):
            return self.coeffs[j]
        return RingElem.zero(self.m, self.r)

    def __add__(self, other: RingPoly) -> RingPoly:
        n = max(len(self.coeffs), len(other.coeffs))
        return RingPoly(tuple(self.coeff(j) + other.coeff(j) for j in range(n)), self.m, self.r)

    def __mul__(self, other: RingPoly) -> RingPoly:
        if not self.coeffs or not other.coeffs:
            return RingPoly((), self.m, self.r)
        out = [RingElem.zero(self.m, self.r)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return RingPoly(tuple(out), self.m, self.r)

    def __call__(self, x: RingElem) -> RingElem:
        acc = RingElem.zero(self.m, self.r)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def reduce_mod_prime(self, p: int) -> RingPoly:
        return RingPoly(tuple(reduce_mod_prime(c, p) for c in self.coeffs), p, self.r)


def poly_from_roots(roots: Iterable[RingElem], m: int, r: int) -> RingPoly:
    """The monic product of (x - root) over ``roots``."""
    out = RingPoly((RingElem.one(m, r),), m, r)
    for root in roots:
        out = out * RingPoly((-root, RingElem.one(m, r)), m, r)
    return out


def crt_lift_poly(parts: Sequence[tuple[RingPoly, int]]) -> RingPoly:
    """Lift polynomials over R_{p_i,r} to the unique one over R_{∏p_i, r}.

    Lifting is coefficient by coefficient (in both x and γ), so the degree of
    the result is the largest degree among the parts.
    """
    if not parts:
        raise ParameterError("nothing to lift")
    primes = [p for _, p in parts]
    if len(set(primes)) != len(primes):
        raise ParameterError(f"moduli {primes} are not pairwise coprime")
    r = parts[0][0].r
    for poly, p in parts:
        if poly.m != p:
            raise ParameterError(f"part declared mod {p} lives over Z_{poly.m}")
        if poly.r != r:
            raise ParameterError("parts disagree on the order r")
    m = prod(primes)
    length = max(len(poly.coeffs) for poly, _ in parts)
    lifted = []
    for j in range(length):
        columns = [poly.coeff(j).coeffs for poly, _ in parts]
        lifted.append(
            RingElem(tuple(crt([col[ell] for col in columns], primes) for ell in range(r)), m)
        )
    return RingPoly(tuple(lifted), m, r)
