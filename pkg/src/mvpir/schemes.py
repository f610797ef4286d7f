"""Query generation, server answers and recovery for every scheme variant.

Variants
--------
mv-2server          two servers over R_{6,6}, S = {1,3,4}, first-order answers
mv-2server-hom-z6   same, answers mapped into Z_6 by γ -> -1
mv-2server-hom-f3   same, answers mapped into F_3 by γ -> -1
mv-2server-order2   two servers, any S ⊆ Z_6 \\ {0}, adds second-order answers
mv-kserver          2^(r-1) servers over R_{m,m}, m = p_1···p_r, symbols in Z_m
baseline-cubic      the classical O(n^(1/3)) scheme over a prime field (see baseline.py)

All servers receive z + t_i·v_tau for a uniform z, so each server's view is
uniform on Z_m^k whatever tau is.  Recovery rebuilds the values of the
restricted polynomial g and its derivatives at γ^{t_i} and isolates the
constant coefficient c_0 = a_tau·γ^{<u_tau, z>}.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from functools import lru_cache
from math import prod
from typing import Optional, Sequence

from .encoder import AnswerBundle, EncodedDatabase, eval_f, eval_f1, eval_f2
from .errors import ConfigError, InternalError, ParameterError, ProtocolError
from .family import MVFamily, grolmusz_S
from .matrix import RingMatrix, adjugate_first_row, determinant, dot
from .ring import (RingElem, crt, crt_lift_poly, gamma_power, hom_apply, is_prime,
                   poly_from_roots, reduce_mod_prime)

BASELINE = "baseline-cubic"
MV_2SERVER = "mv-2server"
MV_HOM_Z6 = "mv-2server-hom-z6"
MV_HOM_F3 = "mv-2server-hom-f3"
MV_ORDER2 = "mv-2server-order2"
MV_KSERVER = "mv-kserver"

VARIANTS = (BASELINE, MV_2SERVER, MV_HOM_Z6, MV_HOM_F3, MV_ORDER2, MV_KSERVER)
SCHEME_IDS = {BASELINE: 0, MV_2SERVER: 1, MV_HOM_Z6: 2, MV_HOM_F3: 3, MV_ORDER2: 4, MV_KSERVER: 5}

# (target modulus, image of γ)
_HOMS = {MV_HOM_Z6: (6, -1), MV_HOM_F3: (3, -1)}


@dataclass(frozen=True)
class SchemeConfig:
    variant: str
    m: int
    primes: tuple[int, ...]
    S: frozenset[int]
    q: int
    t_values: tuple[int, ...]

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if len(self.t_values) != self.q:
            raise ConfigError(f"{self.q} servers need {self.q} t-values, got {len(self.t_values)}")
        if len({t % self.m for t in self.t_values}) != self.q:
            raise ConfigError("t-values must be distinct modulo m")
        if self.variant == BASELINE:
            if not (is_prime(self.m) and self.m > 3):
                raise ConfigError("the baseline needs a prime field with more than 3 elements")
            if any(t % self.m == 0 for t in self.t_values):
                raise ConfigError("baseline t-values must be nonzero")
        elif self.variant == MV_KSERVER:
            r = len(self.primes)
            if self.q != 2 ** (r - 1) or len(self.S | {0}) != 2 * self.q:
                raise ConfigError("k-server scheme needs q = 2^(r-1) and |S ∪ {0}| = 2q")
            if self.t_values != tuple(range(self.q)):
                raise ConfigError("k-server scheme requires t_i = i - 1")
        else:
            if self.m != 6 or self.q != 2:
                raise ConfigError(f"{self.variant} runs with m = 6 and two servers")
            if self.variant != MV_ORDER2 and self.S != frozenset({1, 3, 4}):
                raise ConfigError(f"{self.variant} requires S = {{1, 3, 4}}")

    @property
    def scheme_id(self) -> int:
        return SCHEME_IDS[self.variant]

    @property
    def order(self) -> int:
        return 2 if self.variant == MV_ORDER2 else 1

    @property
    def hom(self) -> Optional[tuple[int, int]]:
        return _HOMS.get(self.variant)

    @property
    def answer_ring(self) -> tuple[int, int]:
        """(modulus, order) of the ring answers are expressed in."""
        if self.hom:
            return self.hom[0], 1
        return self.m, self.m

    @property
    def alphabet(self) -> int:
        return self.m if self.variant == MV_KSERVER else 2

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(sorted(self.S | {0}))

    def answer_size(self, k: int) -> int:
        """Bytes in one serialized answer."""
        if self.variant == BASELINE:
            return k + 1
        count = 1 + k + (k * k if self.order == 2 else 0)
        return count * self.answer_ring[1]

    def accepts(self, family: MVFamily) -> bool:
        return family.m == self.m and family.S <= self.S


def make_config(variant: str, primes: Optional[Sequence[int]] = None,
                t_values: Optional[Sequence[int]] = None, field: int = 7) -> SchemeConfig:
    """Build the standard configuration of a variant, optionally overriding t-values."""
    if variant == BASELINE:
        return SchemeConfig(variant, field, (field,), frozenset(), 2,
                            tuple(t_values) if t_values else (1, 2))
    if variant == MV_KSERVER:
        primes = tuple(primes or (2, 3))
        q = 2 ** (len(primes) - 1)
        return SchemeConfig(variant, prod(primes), primes, grolmusz_S(primes), q,
                            tuple(t_values) if t_values else tuple(range(q)))
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    S = frozenset(range(1, 6)) if variant == MV_ORDER2 else grolmusz_S((2, 3))
    return SchemeConfig(variant, 6, (2, 3), S, 2, tuple(t_values) if t_values else (0, 1))


@dataclass(frozen=True)
class QueryState:
    tau: int
    z: tuple[int, ...]
    queries: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class LambdaVector:
    entries: tuple[RingElem, ...]
    mu: RingElem


def query_gen(cfg: SchemeConfig, family: MVFamily, tau: int, rng=None) -> QueryState:
    """Draw z uniformly from Z_m^k and form q_i = z + t_i·v_tau for each server."""
    if not 0 <= tau < family.n:
        raise ParameterError(f"index {tau} outside [0, {family.n})")
    rng = rng or secrets.SystemRandom()
    m = cfg.m
    z = tuple(rng.randrange(m) for _ in range(family.k))
    v = family.V[tau]
    queries = tuple(tuple((zj + t * vj) % m for zj, vj in zip(z, v)) for t in cfg.t_values)
    return QueryState(tau, z, queries)


def _to_image(cfg: SchemeConfig):
    target, image = cfg.hom
    return lambda e: RingElem.scalar(hom_apply(e, image, target), target, 1)


def server_answer(cfg: SchemeConfig, db: EncodedDatabase, q: Sequence[int]) -> AnswerBundle:
    """F and F^(1) (plus F^(2) for the second-order variant) at γ^q."""
    if len(q) != db.k:
        raise ParameterError(f"query must have {db.k} coordinates, got {len(q)}")
    if any(not 0 <= x < cfg.m for x in q):
        raise ParameterError(f"query coordinates must lie in [0, {cfg.m})")
    bundle = AnswerBundle(eval_f(db, q), eval_f1(db, q), eval_f2(db, q) if cfg.order == 2 else None)
    if cfg.hom:
        bundle = bundle.map(_to_image(cfg))
    return bundle


@lru_cache(maxsize=None)
def build_matrix(cfg: SchemeConfig) -> RingMatrix:
    """Interpolation matrix linking (g, g^(1)[, g^(2)]) at each γ^{t_i} to the c_ℓ.

    Row (t, d) column ℓ holds ℓ^d·γ^{tℓ}; columns run over {0} ∪ S.  For the
    baseline, rows are (t^ℓ) and (ℓ t^{ℓ-1}) over F_p with ℓ = 0..3.
    """
    if cfg.variant == BASELINE:
        p = cfg.m
        rows = []
        for t in cfg.t_values:
            rows.append([pow(t, l, p) for l in range(4)])
            rows.append([l * pow(t, l - 1, p) if l else 0 for l in range(4)])
        return RingMatrix.from_ints(rows, p)
    m = cfg.m
    orders = range(cfg.order + 1)
    cols = cfg.columns
    rows = tuple(
        tuple(gamma_power(t * l, m, m) * (l ** d) for l in cols)
        for t in cfg.t_values for d in orders
    )
    if len(rows) != len(cols):
        raise ConfigError(f"{len(rows)} equations for {len(cols)} unknown coefficients")
    return RingMatrix(rows)


@lru_cache(maxsize=None)
def recovery_row(cfg: SchemeConfig) -> tuple[tuple[RingElem, ...], RingElem]:
    """First row of adj(M) and det(M), in the ring the answers live in."""
    M = build_matrix(cfg)
    if cfg.hom:
        M = M.map(_to_image(cfg))
    det = determinant(M)
    if det.is_zero():
        raise ConfigError(f"interpolation matrix is singular for t-values {cfg.t_values}")
    return adjugate_first_row(M), det


def line_values(cfg: SchemeConfig, v: Sequence[int],
                answers: Sequence[AnswerBundle]) -> list[RingElem]:
    """(g(γ^{t_1}), g^(1)(γ^{t_1}), ..., g(γ^{t_q}), g^(1)(γ^{t_q})) from the answers.

    g^(1)(γ^t) = <F^(1)(γ^{z+t v}), v> and g^(2)(γ^t) = <F^(2)(γ^{z+t v}), v⊗v>.
    """
    if len(answers) != cfg.q:
        raise ProtocolError(f"expected {cfg.q} answers, got {len(answers)}")
    out = []
    for ans in answers:
        if len(ans.f1) != len(v):
            raise ProtocolError("answer dimension does not match the family")
        out.append(ans.f0)
        out.append(dot(ans.f1, v) if v else ans.f0 * 0)
        if cfg.order == 2:
            if ans.f2 is None:
                raise ProtocolError("second-order variant needs F^(2) in every answer")
            acc = ans.f0 * 0
            for j, vj in enumerate(v):
                for l, vl in enumerate(v):
                    acc = acc + ans.f2[j][l] * (vj * vl)
            out.append(acc)
    return out


def _zero_test(cfg, family, state, answers) -> int:
    row, _ = recovery_row(cfg)
    scaled = dot(row, line_values(cfg, family.V[state.tau], answers))
    return 0 if scaled.is_zero() else 1


def reconstruct_2server(cfg: SchemeConfig, family: MVFamily, state: QueryState,
                        answers: Sequence[AnswerBundle]) -> int:
    """Recover the bit a_tau: det(M)·c_0 is zero exactly when a_tau is."""
    if cfg.variant not in (MV_2SERVER, MV_HOM_Z6, MV_HOM_F3):
        raise ConfigError(f"{cfg.variant} is not a first-order two-server variant")
    return _zero_test(cfg, family, state, answers)


def reconstruct_order2(cfg: SchemeConfig, family: MVFamily, state: QueryState,
                       answers: Sequence[AnswerBundle]) -> int:
    if cfg.variant != MV_ORDER2:
        raise ConfigError(f"{cfg.variant} is not the second-order variant")
    if any(a.f2 is None for a in answers):
        raise ProtocolError("second-order recovery needs F^(2) in every answer")
    return _zero_test(cfg, family, state, answers)


@lru_cache(maxsize=None)
def lambda_vector(cfg: SchemeConfig) -> LambdaVector:
    """Row vector λ with λ·M = (μ, 0, ..., 0) and μ nonzero modulo every prime.

    For each prime p_i take f_i(x) = ∏ (x - γ^ℓ) over ℓ in S with ℓ ≡ 0 mod p_i,
    lift the f_i to one f over R_{m,m}, and set α_i = coefficient of x^{i-1},
    β_i = -α_i.  Then (λM)_ℓ = (1 - ℓ)·f(γ^ℓ), which vanishes on S, and
    μ = f(1).  Every identity is re-checked before returning.
    """
    if cfg.variant != MV_KSERVER:
        raise ConfigError("the λ-vector belongs to the k-server scheme")
    m = cfg.m
    parts = []
    for p in cfg.primes:
        roots = [gamma_power(l, p, m) for l in sorted(cfg.S) if l % p == 0]
        parts.append((poly_from_roots(roots, p, m), p))
    f = crt_lift_poly(parts)
    if f.degree != cfg.q - 1:
        raise InternalError(f"lifted polynomial has degree {f.degree}, expected {cfg.q - 1}")
    alphas = [f.coeff(i) for i in range(cfg.q)]
    entries = tuple(e for a in alphas for e in (a, -a))
    mu = f(RingElem.one(m, m))

    for l in cfg.S:
        if not (f(gamma_power(l, m, m)) * (1 - l)).is_zero():
            raise InternalError(f"h({l}) != 0")
    for p in cfg.primes:
        if reduce_mod_prime(mu, p).is_zero():
            raise InternalError(f"μ vanishes modulo {p}")
    product = build_matrix(cfg).left_apply(entries)
    if product[0] != mu or any(not e.is_zero() for e in product[1:]):
        raise InternalError("λ·M is not (μ, 0, ..., 0)")
    return LambdaVector(entries, mu)


def reconstruct_kserver(cfg: SchemeConfig, family: MVFamily, state: QueryState,
                        answers: Sequence[AnswerBundle]) -> int:
    """Recover a_tau in Z_m from ν = λ·b = μ·a_tau·γ^{<u_tau,z>}, prime by prime."""
    lam = lambda_vector(cfg)
    nu = dot(lam.entries, line_values(cfg, family.V[state.tau], answers))
    m = cfg.m
    shift = sum(a * b for a, b in zip(family.U[state.tau], state.z)) % m
    residues = []
    for p in cfg.primes:
        j = next((j for j, c in enumerate(lam.mu.coeffs) if c % p), None)
        if j is None:
            raise InternalError(f"no coefficient of μ is invertible mod {p}")
        residues.append(pow(lam.mu.coeffs[j], -1, p) * nu.coeffs[(j + shift) % m] % p)
    return crt(residues, cfg.primes)


def reconstruct(cfg: SchemeConfig, family: MVFamily, state: QueryState,
                answers: Sequence[AnswerBundle]) -> int:
    if cfg.variant == MV_KSERVER:
        return reconstruct_kserver(cfg, family, state, answers)
    if cfg.variant == MV_ORDER2:
        return reconstruct_order2(cfg, family, state, answers)
    return reconstruct_2server(cfg, family, state, answers)


def check_symbols(cfg: SchemeConfig, symbols: Sequence[int]) -> None:
    """Bit variants carry {0,1} symbols; the k-server variant carries Z_m symbols."""
    bad = next((s for s in symbols if not 0 <= s < cfg.alphabet), None)
    if bad is not None:
        raise ParameterError(f"symbol {bad} outside the {cfg.variant} alphabet Z_{cfg.alphabet}")


def restriction_coefficients(db: EncodedDatabase, v: Sequence[int],
                             z: Sequence[int]) -> list[RingElem]:
    """c_ℓ = Σ a_i γ^{<z,u_i>} over terms with <u_i, v> ≡ ℓ (mod m), computed term by term."""
    m, r = db.m, db.r
    cs = [RingElem.zero(m, r) for _ in range(m)]
    for a, u in db.terms:
        ell = sum(x * y for x, y in zip(u, v)) % m
        cs[ell] = cs[ell] + gamma_power(sum(x * y for x, y in zip(u, z)), m, r) * a
    return cs
