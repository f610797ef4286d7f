"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible with ``-s``); the
same lines are repeated in the terminal summary at the end of the run.
"""

import itertools
import math
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from mvpir import bench
from mvpir.encoder import encode
from mvpir.family import grolmusz_S, search_family, validate_family
from mvpir.matrix import RingMatrix, adjugate, determinant
from mvpir.net import LoopbackChannel, PIRServer, retrieve_with
from mvpir.ring import RingElem, RingPoly, gamma_power, hom_apply, reduce_mod_prime
from mvpir.audit import privacy_audit
from mvpir.baseline import cubic_encode
from mvpir.schemes import (BASELINE, MV_2SERVER, MV_HOM_F3, MV_HOM_Z6, MV_KSERVER, MV_ORDER2,
                           QueryState, build_matrix, lambda_vector, make_config, query_gen,
                           reconstruct, restriction_coefficients, server_answer)
from mvpir.wire import HEADER_SIZE, MsgType, Frame, decode_frame

RESULTS: list[str] = []


@contextmanager
def criterion(number: int, title: str, limit: float | None = None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if limit is not None:
            assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
    except BaseException as exc:
        line = f"FAIL criterion {number:2d} {title}: {exc!r}"[:200]
        RESULTS.append(line)
        print(line)
        raise
    line = f"PASS criterion {number:2d} {title} ({elapsed:.2f}s)"
    RESULTS.append(line)
    print(line)


def g6(t):
    return gamma_power(t, 6, 6)


def answers_for(cfg, db, state):
    return [server_answer(cfg, db, q) for q in state.queries]


def fixed_state(cfg, family, tau, z):
    v = family.V[tau]
    qs = tuple(tuple((a + t * b) % cfg.m for a, b in zip(z, v)) for t in cfg.t_values)
    return QueryState(tau, tuple(z), qs)


def correctness_harness(cfg, family, databases, z_per_tau, seed, exhaustive=False):
    """Count failures over random databases, every tau and random (or all) z."""
    rng = random.Random(seed)
    failures = trials = 0
    all_z = list(itertools.product(range(cfg.m), repeat=family.k)) if exhaustive else None
    for _ in range(databases):
        symbols = [rng.randrange(cfg.alphabet) for _ in range(family.n)]
        db = encode(symbols, family)
        for tau in range(family.n):
            zs = all_z or [[rng.randrange(cfg.m) for _ in range(family.k)]
                           for _ in range(z_per_tau)]
            for z in zs:
                state = fixed_state(cfg, family, tau, z)
                got = reconstruct(cfg, family, state, answers_for(cfg, db, state))
                trials += 1
                failures += got != symbols[tau]
    return failures, trials


def test_c01_first_order_determinant():
    with criterion(1, "det of first-order matrix = 3γ^5+4γ^4+3γ^3+2γ", 1.0):
        build_matrix.cache_clear()
        det = determinant(build_matrix(make_config(MV_2SERVER)))
        assert det == g6(5) * 3 + g6(4) * 4 + g6(3) * 3 + g6(1) * 2, str(det)


def test_c02_second_order_determinant():
    with criterion(2, "det of second-order matrix = 4+2γ^3", 1.0):
        build_matrix.cache_clear()
        det = determinant(build_matrix(make_config(MV_ORDER2)))
        assert det == g6(0) * 4 + g6(3) * 2, str(det)


def test_c03_homomorphic_images():
    with criterion(3, "γ -> -1 image of det is 2 in Z_6 and nonzero in F_3"):
        det = determinant(build_matrix(make_config(MV_2SERVER)))
        assert hom_apply(det, -1, 6) == 2
        assert hom_apply(det, -1, 3) != 0
        # the image of the matrix itself has the same determinant image
        for variant, target in ((MV_HOM_Z6, 6), (MV_HOM_F3, 3)):
            M = build_matrix(make_config(variant)).map(
                lambda e: RingElem.scalar(hom_apply(e, -1, target), target, 1))
            assert determinant(M).coeffs[0] == hom_apply(det, -1, target)


def test_c04_adjugate_identity():
    with criterion(4, "M·adj(M) = det(M)·I (200 random 4x4 over R_6,6; all 2x2 over R_2,2)", 30.0):
        rng = random.Random(2024)
        I4 = RingMatrix.identity(4, 6, 6)
        for _ in range(200):
            M = RingMatrix(tuple(
                tuple(RingElem(tuple(rng.randrange(6) for _ in range(6)), 6) for _ in range(4))
                for _ in range(4)))
            assert M @ adjugate(M) == I4.scale(determinant(M))
        elems = [RingElem(cs, 2) for cs in itertools.product(range(2), repeat=2)]
        I2 = RingMatrix.identity(2, 2, 2)
        count = 0
        for a, b, c, d in itertools.product(elems, repeat=4):
            M = RingMatrix(((a, b), (c, d)))
            assert M @ adjugate(M) == I2.scale(determinant(M))
            count += 1
        assert count == 256


def test_c05_lambda_vector():
    with criterion(5, "λ·M = (μ,0,..,0), μ nonzero mod each prime, h vanishes on S", 5.0):
        for primes in ((2, 3), (2, 3, 5)):
            cfg = make_config(MV_KSERVER, primes=primes)
            lambda_vector.cache_clear()
            lam = lambda_vector(cfg)
            product = build_matrix(cfg).left_apply(lam.entries)
            assert product[0] == lam.mu
            assert all(e.is_zero() for e in product[1:])
            for p in primes:
                assert not reduce_mod_prime(lam.mu, p).is_zero()
            m = cfg.m
            f = RingPoly(tuple(lam.entries[0::2]), m, m)
            assert all(lam.entries[2 * i + 1] == -lam.entries[2 * i] for i in range(cfg.q))
            for ell in cfg.S:
                assert (f(gamma_power(ell, m, m)) * (1 - ell)).is_zero()
            assert f(RingElem.one(m, m)) == lam.mu


def test_c06_two_server_correctness(fam6, fam6_small):
    with criterion(6, "mv-2server recovers every bit (k=8, n=24, 50 dbs x 100 z; k=2 all z)", 120.0):
        cfg = make_config(MV_2SERVER)
        assert fam6.k <= 8 and fam6.n >= 20
        failures, trials = correctness_harness(cfg, fam6, 50, 100, seed=6)
        assert trials == 50 * fam6.n * 100
        assert failures == 0, f"{failures}/{trials} wrong"
        failures, trials = correctness_harness(cfg, fam6_small, 50, 0, seed=60, exhaustive=True)
        assert failures == 0, f"{failures}/{trials} wrong (exhaustive z)"


@pytest.fixture(scope="module")
def fam_order2():
    fam = search_family(6, 5, frozenset(range(1, 6)), 20, seed=1)
    G = fam.inner_products()
    assert set(G[~np.eye(fam.n, dtype=bool)].tolist()) == {1, 2, 3, 4, 5}
    return fam


def test_c07_order2_correctness(fam_order2):
    with criterion(7, "second-order variant recovers every bit (S = Z_6 minus 0, n=20)", 120.0):
        cfg = make_config(MV_ORDER2)
        failures, trials = correctness_harness(cfg, fam_order2, 50, 100, seed=7)
        assert failures == 0, f"{failures}/{trials} wrong"
        small = search_family(6, 2, frozenset(range(1, 6)), 4, seed=0)
        failures, trials = correctness_harness(cfg, small, 20, 0, seed=70, exhaustive=True)
        assert failures == 0, f"{failures}/{trials} wrong (exhaustive z)"


def test_c08_kserver_correctness(fam30):
    with criterion(8, "4-server m=30 scheme recovers every Z_30 symbol via CRT", 120.0):
        cfg = make_config(MV_KSERVER, primes=(2, 3, 5))
        assert cfg.q == 4 and fam30.n >= 8
        rng = random.Random(8)
        servers = []
        for _ in range(50):
            symbols = [rng.randrange(30) for _ in range(fam30.n)]
            server = PIRServer(cfg, fam30, encode(symbols, fam30))
            for tau in range(fam30.n):
                for _ in range(25):
                    got, _ = retrieve_with(cfg, fam30, [LoopbackChannel(server)] * 4, tau, rng)
                    assert got == symbols[tau]
            servers.append(server)
        assert len(servers) == 50


def test_c09_exact_privacy():
    with criterion(9, "per-server query distributions identical across tau (TV = 0)", 60.0):
        families = {
            2: [search_family(6, 2, {1, 3, 4}, 3, seed=1),
                search_family(6, 2, frozenset(range(1, 6)), 4, seed=0)],
            3: [search_family(6, 3, {1, 3, 4}, 4, seed=0),
                search_family(6, 3, frozenset(range(1, 6)), 6, seed=0)],
        }
        variants = [MV_2SERVER, MV_HOM_Z6, MV_HOM_F3, MV_ORDER2, MV_KSERVER]
        audited = 0
        for k, fams in families.items():
            for fam in fams:
                assert validate_family(fam)
                for variant in variants:
                    cfg = make_config(variant)
                    if not cfg.accepts(fam):
                        continue
                    report = privacy_audit(cfg, fam, range(fam.n))
                    assert report.space == 6 ** k
                    assert report.private, (variant, k, report.per_server)
                    audited += 1
        assert audited == 2 * (len(variants) + 1)
        # the baseline runs over F_7: audit all 4 weight-3 points of {0,1}^4
        db = cubic_encode([1, 0, 1, 1], k=4)
        assert privacy_audit(make_config(BASELINE), db, range(db.n)).private


def test_c10_communication_scaling(fam6):
    with criterion(10, "mv-2server downlink (k+1)·6 bytes for all n; baseline exponent 1/3", 120.0):
        cfg = make_config(MV_2SERVER)
        rng = random.Random(10)
        for n in (1, 5, 12, 24):
            server = PIRServer(cfg, fam6, encode([rng.randrange(2) for _ in range(n)], fam6))
            _, report = retrieve_with(cfg, fam6, [LoopbackChannel(server)] * 2, n - 1, rng)
            assert report.bytes_down == ((fam6.k + 1) * 6,) * 2
        ns = [56, 455, 3654]
        rows = bench.run_bench([BASELINE], ns, seed=10, timing=False)
        assert [r.k for r in rows] == [8, 15, 29]
        slope = np.polyfit(np.log(ns), np.log([r.bytes_total for r in rows]), 1)[0]
        assert abs(slope - 1 / 3) <= 0.1, f"fitted exponent {slope:.3f}"


def test_c11_wire_robustness(fam6):
    with criterion(11, "10,000 fuzzed frames give only ERROR or close; valid frames round-trip"):
        server = PIRServer(make_config(MV_2SERVER), fam6, encode([1] * fam6.n, fam6))
        rng = random.Random(11)
        valid = Frame(MsgType.QUERY, 1, bytes(fam6.k)).encode()
        outcomes = {"error": 0, "close": 0, "answer": 0}
        for i in range(10_000):
            mode = i % 4
            if mode == 0:
                data = bytes(rng.randrange(256) for _ in range(rng.randrange(64)))
            elif mode == 1:
                data = bytearray(valid)
                data[rng.randrange(len(data))] ^= 1 << rng.randrange(8)
                data = bytes(data)
            elif mode == 2:
                data = valid[: rng.randrange(len(valid))] + bytes(rng.randrange(4))
            else:
                data = valid[:HEADER_SIZE - 7] + bytes(rng.randrange(256) for _ in range(7)) \
                    + bytes(rng.randrange(256) for _ in range(rng.randrange(16)))
            reply, close = server.handle_bytes(data)
            if reply is None:
                assert close
                outcomes["close"] += 1
                continue
            kind = decode_frame(reply).msg_type
            # a bit flip inside the query body can still be a legal query
            assert kind in (MsgType.ERROR, MsgType.ANSWER)
            if kind == MsgType.ANSWER:
                assert decode_frame(data).msg_type == MsgType.QUERY
            outcomes["error" if kind == MsgType.ERROR else "answer"] += 1
        assert outcomes["error"] > 0 and outcomes["close"] > 0
        for _ in range(500):
            f = Frame(rng.choice(list(MsgType)), rng.randrange(6),
                      bytes(rng.randrange(256) for _ in range(rng.randrange(200))))
            assert decode_frame(f.encode()) == f
            assert decode_frame(f.encode()).encode() == f.encode()


def test_c12_coefficient_structure(fam6):
    with criterion(12, "c_2 = c_5 = 0 and c_0 = a_tau·γ^<u_tau,z> on 1,000 triples"):
        rng = random.Random(12)
        for _ in range(1000):
            bits = [rng.randrange(2) for _ in range(fam6.n)]
            db = encode(bits, fam6)
            tau = rng.randrange(fam6.n)
            z = [rng.randrange(6) for _ in range(fam6.k)]
            c = restriction_coefficients(db, fam6.V[tau], z)
            assert c[2].is_zero() and c[5].is_zero()
            shift = sum(a * b for a, b in zip(fam6.U[tau], z))
            assert c[0] == g6(shift) * bits[tau]
