"""S-matching vector families: validation, generation, and file I/O.

A family is a pair of lists (U, V) of vectors in Z_m^k with
<u_i, v_i> = 0 and <u_i, v_j> in S for i != j.  Indices are 0-based.

Families are produced here by seeded randomized greedy search.  Any
externally built family (e.g. from an asymptotic construction) can be
dropped in through the file format, since every load is re-validated.

File format::

    mvf <m> <k> <n>
    S <residues...>
    u <k ints>      (n lines)
    v <k ints>      (n lines)
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .errors import CapacityError, FamilyFormatError, IntegrityError, ParameterError
from .ring import crt, is_prime, prime_factors

# above this many points the candidate space is sampled rather than enumerated
ENUMERATION_LIMIT = 1 << 21


@dataclass(frozen=True)
class MVFamily:
    m: int
    k: int
    U: tuple[tuple[int, ...], ...]
    V: tuple[tuple[int, ...], ...]
    S: frozenset[int]

    def __post_init__(self):
        if self.m < 2:
            raise ParameterError("modulus must be at least 2")
        U = tuple(tuple(int(x) % self.m for x in u) for u in self.U)
        V = tuple(tuple(int(x) % self.m for x in v) for v in self.V)
        if len(U) != len(V):
            raise ParameterError("U and V have different lengths")
        if any(len(vec) != self.k for vec in U + V):
            raise ParameterError(f"every vector must have {self.k} coordinates")
        S = frozenset(int(s) for s in self.S)
        if 0 in S or any(not 0 < s < self.m for s in S):
            raise ParameterError(f"S must consist of nonzero residues mod {self.m}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "S", S)

    @property
    def n(self) -> int:
        return len(self.U)

    def to_text(self) -> str:
        lines = [f"mvf {self.m} {self.k} {self.n}", "S " + " ".join(map(str, sorted(self.S)))]
        lines += ["u " + " ".join(map(str, u)) for u in self.U]
        lines += ["v " + " ".join(map(str, v)) for v in self.V]
        return "\n".join(lines) + "\n"

    @cached_property
    def digest(self) -> bytes:
        """SHA-256 of the canonical text form; servers and clients compare it."""
        return hashlib.sha256(self.to_text().encode()).digest()

    def inner_products(self) -> np.ndarray:
        """n x n matrix of <u_i, v_j> mod m."""
        if self.n == 0:
            return np.zeros((0, 0), dtype=np.int64)
        U = np.array(self.U, dtype=np.int64).reshape(self.n, self.k)
        V = np.array(self.V, dtype=np.int64).reshape(self.n, self.k)
        return (U @ V.T) % self.m


class ValidationReport(NamedTuple):
    ok: bool
    pair: Optional[tuple[int, int]] = None
    value: Optional[int] = None

    def __bool__(self):
        return self.ok


def validate_family(family: MVFamily) -> ValidationReport:
    """Check both matching conditions; report the first violating (i, j) in row order."""
    G = family.inner_products()
    allowed = np.zeros(family.m, dtype=bool)
    allowed[list(family.S)] = True
    good = allowed[G]
    np.fill_diagonal(good, G.diagonal() == 0)
    bad = np.argwhere(~good)
    if len(bad) == 0:
        return ValidationReport(True)
    i, j = (int(x) for x in bad[0])
    return ValidationReport(False, (i, j), int(G[i, j]))


def grolmusz_S(primes) -> frozenset[int]:
    """Residues mod m = ∏p_i that are 0 or 1 modulo every p_i, minus 0."""
    primes = tuple(primes)
    if len(primes) < 2:
        raise ParameterError("at least two primes are required")
    if len(set(primes)) != len(primes) or not all(is_prime(p) for p in primes):
        raise ParameterError(f"{primes} are not distinct primes")
    out = {crt(bits, primes) for bits in itertools.product((0, 1), repeat=len(primes))}
    out.discard(0)
    return frozenset(out)


def _candidate_space(m: int, k: int) -> np.ndarray:
    grids = np.indices((m,) * k, dtype=np.int32)
    return grids.reshape(k, -1).T.copy()


def _orthogonalize(u: np.ndarray, cand: np.ndarray, m: int, rng) -> np.ndarray:
    """Adjust one coordinate per prime-power factor so that <u, v> = 0 mod m."""
    out = cand.copy()
    for p in prime_factors(m):
        Q = p
        while m % (Q * p) == 0:
            Q *= p
        units = np.nonzero(u % p)[0]
        if len(units) == 0:
            continue
        c = int(units[rng.integers(len(units))])
        inv = pow(int(u[c]) % Q, -1, Q)
        partial = (out @ u - out[:, c] * u[c]) % Q
        want = (-inv * partial) % Q
        rest = m // Q
        idem = rest * pow(rest, -1, Q) % m
        out[:, c] = (out[:, c] - idem * (out[:, c] % Q) + idem * want) % m
    return out


def search_family(m: int, k: int, S, target_n: int, seed: int = 0,
                  max_attempts: int = 256, batch: int = 1 << 15) -> MVFamily:
    """Grow an S-matching family greedily until it has ``target_n`` pairs.

    Each step scans candidate vectors u with <u, v_j> in S for all kept v_j
    (in a seeded random order), and for each such u looks for a v with
    <u, v> = 0 and <u_i, v> in S for all kept u_i.  The first compatible pair
    is kept.  Small spaces (m^k <= ENUMERATION_LIMIT) are scanned exhaustively;
    larger ones are sampled in batches, with v pre-projected onto u's
    orthogonal complement.

    Raises CapacityError (carrying the largest family found) when a step
    examines ``max_attempts`` candidates for u without success.
    """
    S = frozenset(int(s) % m for s in S)
    if target_n < 1:
        raise ParameterError("target_n must be at least 1")
    if not S or 0 in S:
        raise ParameterError("S must be nonempty and exclude 0")
    rng = np.random.default_rng(seed)
    allowed = np.zeros(m, dtype=bool)
    allowed[list(S)] = True
    U: list[np.ndarray] = []
    V: list[np.ndarray] = []

    def done() -> MVFamily:
        return MVFamily(m, k, tuple(map(tuple, U)), tuple(map(tuple, V)), S)

    if m ** k <= ENUMERATION_LIMIT:
        X = _candidate_space(m, k)
        X = X[rng.permutation(len(X))]
        # a zero u or v supports only n = 1, so scan it last
        zero = np.flatnonzero(~X.any(axis=1))
        X = np.concatenate([np.delete(X, zero, axis=0), X[zero]])
        u_ok = np.ones(len(X), dtype=bool)
        v_ok = np.ones(len(X), dtype=bool)
        while len(U) < target_n:
            found = None
            for idx in np.flatnonzero(u_ok)[:max_attempts]:
                u = X[idx]
                hits = np.flatnonzero(v_ok & ((X @ u) % m == 0))
                if len(hits):
                    found = (u, X[hits[0]])
                    break
            if found is None:
                raise CapacityError(
                    f"search stalled at n={len(U)} (target {target_n})", largest=done())
            u, v = found
            U.append(u.astype(np.int64))
            V.append(v.astype(np.int64))
            u_ok &= allowed[(X @ v) % m]
            v_ok &= allowed[(X @ u) % m]
        return done()

    while len(U) < target_n:
        Um = np.array(U, dtype=np.int64).reshape(len(U), k)
        Vm = np.array(V, dtype=np.int64).reshape(len(V), k)
        attempts = 0
        found = None
        while attempts < max_attempts and found is None:
            cu = rng.integers(0, m, (batch, k))
            cu = cu[allowed[(cu @ Vm.T) % m].all(axis=1)]
            if len(cu) == 0:
                attempts += 1
                continue
            for u in cu:
                attempts += 1
                cv = _orthogonalize(u, rng.integers(0, m, (batch, k)), m, rng)
                keep = ((cv @ u) % m == 0) & allowed[(cv @ Um.T) % m].all(axis=1)
                hits = np.flatnonzero(keep)
                if len(hits):
                    found = (u, cv[hits[0]])
                    break
                if attempts >= max_attempts:
                    break
        if found is None:
            raise CapacityError(
                f"search stalled at n={len(U)} (target {target_n})", largest=done())
        U.append(found[0])
        V.append(found[1])
    return done()


def save_family(family: MVFamily, path) -> None:
    Path(path).write_text(family.to_text())


def parse_family(text: str) -> MVFamily:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    try:
        tag, m, k, n = lines[0]
        if tag != "mvf":
            raise ValueError("missing 'mvf' header")
        m, k, n = int(m), int(k), int(n)
        if lines[1][0] != "S":
            raise ValueError("second line must start with 'S'")
        S = [int(x) for x in lines[1][1:]]
        body = lines[2:]
        if len(body) != 2 * n:
            raise ValueError(f"expected {2 * n} vector lines, found {len(body)}")
        U, V = [], []
        for i, row in enumerate(body):
            want = "u" if i < n else "v"
            if row[0] != want or len(row) != k + 1:
                raise ValueError(f"malformed vector line {i + 3}")
            (U if want == "u" else V).append(tuple(int(x) for x in row[1:]))
    except (IndexError, ValueError) as exc:
        raise FamilyFormatError(f"cannot parse family: {exc}") from exc
    try:
        return MVFamily(m, k, tuple(U), tuple(V), frozenset(S))
    except ParameterError as exc:
        raise FamilyFormatError(str(exc)) from exc


def load_family(path) -> MVFamily:
    """Parse a family file and re-validate it; a violation raises IntegrityError."""
    family = parse_family(Path(path).read_text())
    report = validate_family(family)
    if not report:
        i, j = report.pair
        raise IntegrityError(
            f"family violates the matching property at pair (u_{i}, v_{j}): "
            f"inner product {report.value}", pair=report.pair)
    return family
