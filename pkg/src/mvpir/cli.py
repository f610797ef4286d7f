"""Command-line entry point: ``mvpir <command> ...``.

Exit codes: 0 success, 1 usage or bad input, 2 capacity/search failure,
3 protocol error, 4 selftest failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from . import bench
from .audit import privacy_audit
from .errors import CapacityError, MVPIRError, ProtocolError
from .family import grolmusz_S, load_family, save_family, search_family, validate_family
from .net import retrieve, serve
from .ring import RingElem, gamma_power, hom_apply, prime_factors
from .schemes import (MV_2SERVER, MV_KSERVER, MV_ORDER2, VARIANTS, build_matrix,
                      check_symbols, lambda_vector, make_config)

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_PROTOCOL, EXIT_SELFTEST = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _address(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def _config(args):
    primes = _int_list(args.primes) if getattr(args, "primes", None) else None
    return make_config(args.variant, primes=primes)


def cmd_gen_family(args) -> int:
    primes = _int_list(args.primes)
    S = grolmusz_S(primes)
    m = args.m or 1
    if not args.m:
        for p in primes:
            m *= p
    if args.any_S:
        S = frozenset(range(1, m))
    print(f"S = {{{', '.join(map(str, sorted(S)))}}}")
    try:
        family = search_family(m, args.k, S, args.n, seed=args.seed, max_attempts=args.max_attempts)
    except CapacityError as exc:
        print(f"search exhausted its budget; largest family found has n={exc.largest.n}",
              file=sys.stderr)
        return EXIT_CAPACITY
    save_family(family, args.out)
    print(f"n={family.n} k={family.k} |S|={len(family.S)} -> {args.out}")
    return EXIT_OK


def cmd_encode(args) -> int:
    cfg = _config(args)
    family = load_family(args.family)
    if args.symbols is not None:
        symbols = _int_list(args.symbols)
    else:
        rng = random.Random(args.seed)
        symbols = [rng.randrange(cfg.alphabet) for _ in range(args.random)]
    if len(symbols) > family.n:
        print(f"{len(symbols)} symbols exceed family size {family.n}", file=sys.stderr)
        return EXIT_USAGE
    check_symbols(cfg, symbols)
    Path(args.out).write_bytes(bytes(symbols))
    print(f"wrote {len(symbols)} symbols ({sum(1 for s in symbols if s)} nonzero) -> {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    try:
        serve(args.db, args.family, _config(args), (args.host, args.port))
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_get(args) -> int:
    cfg = _config(args)
    family = load_family(args.family)
    addresses = [_address(a) for a in args.servers.split(",")]
    rng = random.Random(args.seed) if args.seed is not None else None
    symbol, report = retrieve(cfg, family, addresses, args.index, rng, timeout=args.timeout)
    print(json.dumps({
        "index": args.index, "symbol": symbol, "variant": report.variant,
        "n": report.n, "k": report.k, "bytes_up": list(report.bytes_up),
        "bytes_down": list(report.bytes_down), "total": report.total,
        "overhead": report.overhead,
    }))
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = _config(args)
    family = load_family(args.family)
    taus = _int_list(args.taus) if args.taus else list(range(family.n))
    report = privacy_audit(cfg, family, taus, limit=args.limit)
    for j, tv in enumerate(report.per_server):
        print(f"server {j + 1}: max TV distance = {tv}")
    print("private" if report.private else "NOT private")
    return EXIT_OK if report.private else EXIT_PROTOCOL


def cmd_bench(args) -> int:
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        print(f"unknown variants: {unknown}", file=sys.stderr)
        return EXIT_USAGE
    rows = bench.run_bench(variants, _int_list(args.n_list), seed=args.seed, k=args.k,
                           primes=tuple(_int_list(args.primes)), timing=not args.no_timing)
    if args.out == "-":
        bench.write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            bench.write_csv(rows, fh)
    return EXIT_OK


def _selftest_checks(family_path):
    from .matrix import RingMatrix, adjugate, determinant
    from .net import make_server, start_background

    g = lambda t: gamma_power(t, 6, 6)  # noqa: E731
    expected = g(5) * 3 + g(4) * 4 + g(3) * 3 + g(1) * 2
    det1 = determinant(build_matrix(make_config(MV_2SERVER)))
    yield "determinant (first order)", det1 == expected, f"det(M) = {det1}"
    det2 = determinant(build_matrix(make_config(MV_ORDER2)))
    yield "determinant (second order)", det2 == g(0) * 4 + g(3) * 2, f"det(M) = {det2}"
    z6, f3 = hom_apply(det1, -1, 6), hom_apply(det1, -1, 3)
    yield "homomorphic images", z6 == 2 and f3 != 0, f"Z_6: {z6}, F_3: {f3}"

    rng = random.Random(0)
    ok = True
    for _ in range(20):
        M = RingMatrix(tuple(tuple(RingElem(tuple(rng.randrange(6) for _ in range(6)), 6)
                                   for _ in range(4)) for _ in range(4)))
        ok &= M @ adjugate(M) == RingMatrix.identity(4, 6, 6).scale(determinant(M))
    yield "adjugate identity", ok, "20 random 4x4 matrices over R_{6,6}"

    for primes in ((2, 3), (2, 3, 5)):
        lam = lambda_vector(make_config(MV_KSERVER, primes=primes))
        yield f"lambda vector {primes}", True, f"μ = {lam.mu}"

    if family_path:
        family = load_family(family_path)
        yield "family file", True, f"n={family.n} k={family.k} m={family.m}"
    else:
        family = search_family(6, 6, grolmusz_S((2, 3)), 10, seed=0)
        yield "family search", bool(validate_family(family)), f"n={family.n} k={family.k}"

    cfg = make_config(MV_2SERVER) if family.m == 6 and family.S <= {1, 3, 4} else None
    if cfg is None:
        primes = prime_factors(family.m)
        cfg = make_config(MV_KSERVER, primes=primes)
    symbols = [rng.randrange(cfg.alphabet) for _ in range(family.n)]
    servers = [make_server(cfg, family, symbols) for _ in range(cfg.q)]
    for s in servers:
        start_background(s)
    try:
        addresses = [s.server_address[:2] for s in servers]
        got = [retrieve(cfg, family, addresses, tau, rng)[0] for tau in range(family.n)]
    finally:
        for s in servers:
            s.shutdown()
            s.server_close()
    yield "loopback retrieval", got == symbols, f"{cfg.variant}, {family.n} indices over TCP"


def cmd_selftest(args) -> int:
    failed = False
    checks = _selftest_checks(args.family)
    while True:
        try:
            name, ok, detail = next(checks)
        except StopIteration:
            break
        except (MVPIRError, OSError) as exc:
            print(f"FAIL {type(exc).__name__}: {exc}")
            failed = True
            break
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed |= not ok
    return EXIT_SELFTEST if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mvpir", description="Matching-vector private information retrieval")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scheme_args(sp):
        sp.add_argument("--variant", choices=VARIANTS, default=MV_2SERVER)
        sp.add_argument("--primes", help="prime factors of m for mv-kserver, e.g. 2,3,5")

    sp = sub.add_parser("gen-family", help="search for a matching vector family")
    sp.add_argument("--primes", default="2,3")
    sp.add_argument("--m", type=int, help="modulus (default: product of the primes)")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--any-S", action="store_true", help="allow every nonzero inner product")
    sp.add_argument("--max-attempts", type=int, default=256)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_gen_family)

    sp = sub.add_parser("encode", help="write a database file for a family")
    sp.add_argument("--family", required=True)
    scheme_args(sp)
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--symbols", help="comma-separated symbols")
    src.add_argument("--random", type=int, metavar="N", help="N random symbols")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_encode)

    sp = sub.add_parser("serve", help="run a server")
    sp.add_argument("--family", required=True)
    sp.add_argument("--db", required=True)
    scheme_args(sp)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=7700)
    sp.set_defaults(fn=cmd_serve)

    sp = sub.add_parser("get", help="privately retrieve one symbol")
    sp.add_argument("--family", required=True)
    scheme_args(sp)
    sp.add_argument("--servers", required=True, help="host:port list in server order")
    sp.add_argument("--index", type=int, required=True)
    sp.add_argument("--seed", type=int, help="fixed seed (testing only; default is OS randomness)")
    sp.add_argument("--timeout", type=float, default=5.0)
    sp.set_defaults(fn=cmd_get)

    sp = sub.add_parser("audit", help="exact privacy audit by enumerating z")
    sp.add_argument("--family", required=True)
    scheme_args(sp)
    sp.add_argument("--taus", help="comma-separated indices (default: all)")
    sp.add_argument("--limit", type=int, default=10 ** 6)
    sp.set_defaults(fn=cmd_audit)

    sp = sub.add_parser("bench", help="communication cost per variant and n")
    sp.add_argument("--variants", default="baseline-cubic,mv-2server")
    sp.add_argument("--n-list", default="")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--k", type=int, default=8, help="family dimension for MV variants")
    sp.add_argument("--primes", default="2,3", help="primes for mv-kserver")
    sp.add_argument("--no-timing", action="store_true", help="write wall_ms as 0")
    sp.add_argument("--out", default="-")
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("selftest", help="check the core identities and a loopback retrieval")
    sp.add_argument("--family", help="also validate this family file")
    sp.set_defaults(fn=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (MVPIRError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
