"""Communication-cost benchmark: one loopback retrieval per (variant, n)."""

from __future__ import annotations

import csv
import logging
import random
import time
from dataclasses import astuple, dataclass
from typing import Iterable, Sequence

from . import baseline
from .errors import CapacityError
from .family import MVFamily, search_family
from .net import LoopbackChannel, PIRServer, retrieve_with
from .encoder import encode
from .schemes import BASELINE, MV_KSERVER, make_config

log = logging.getLogger(__name__)

CSV_HEADER = ("variant", "n", "k", "q", "bytes_total", "wall_ms")


@dataclass(frozen=True)
class BenchRow:
    variant: str
    n: int
    k: int
    q: int
    bytes_total: int
    wall_ms: float


def _baseline_row(n: int, rng: random.Random, field: int) -> BenchRow:
    cfg = make_config(BASELINE, field=field)
    bits = [rng.randrange(2) for _ in range(n)]
    db = baseline.cubic_encode(bits, field)
    tau = rng.randrange(n)
    start = time.perf_counter()
    z, points = baseline.cubic_query(cfg, db, tau, rng)
    answers = [baseline.cubic_answer(db, x) for x in points]
    got = baseline.cubic_reconstruct(cfg, z, answers)
    wall = (time.perf_counter() - start) * 1000
    if got != bits[tau]:
        raise AssertionError(f"baseline retrieval returned {got}, expected {bits[tau]}")
    total = sum(len(baseline.encode_query(x)) for x in points)
    total += sum(len(baseline.encode_answer(a)) for a in answers)
    return BenchRow(BASELINE, n, db.k, cfg.q, total, wall)


def _mv_row(variant: str, family: MVFamily, n: int, rng: random.Random, primes) -> BenchRow:
    cfg = make_config(variant, primes=primes if variant == MV_KSERVER else None)
    symbols = [rng.randrange(cfg.alphabet) for _ in range(n)]
    server = PIRServer(cfg, family, encode(symbols, family))
    tau = rng.randrange(n)
    start = time.perf_counter()
    got, report = retrieve_with(cfg, family, [LoopbackChannel(server)] * cfg.q, tau, rng)
    wall = (time.perf_counter() - start) * 1000
    if got != symbols[tau]:
        raise AssertionError(f"{variant} retrieval returned {got}, expected {symbols[tau]}")
    return BenchRow(variant, n, family.k, cfg.q, report.total, wall)


def run_bench(variants: Sequence[str], n_list: Sequence[int], seed: int = 0, k: int = 8,
              primes=(2, 3), field: int = 7, timing: bool = True) -> list[BenchRow]:
    """Rows for every (variant, n); MV variants share one searched family per variant.

    MV rows with n beyond the family that the search reached are skipped.
    With ``timing=False`` wall_ms is written as 0 so output is byte-stable.
    """
    rows = []
    for variant in variants:
        rng = random.Random(f"{seed}:{variant}")
        family = None
        if variant != BASELINE and n_list:
            cfg = make_config(variant, primes=primes if variant == MV_KSERVER else None)
            try:
                family = search_family(cfg.m, k, cfg.S, max(n_list), seed=seed)
            except CapacityError as exc:
                family = exc.largest
                log.warning("%s: family search reached n=%d only", variant, family.n)
        for n in n_list:
            if variant == BASELINE:
                row = _baseline_row(n, rng, field)
            elif n > family.n:
                log.warning("%s: skipping n=%d (family size %d)", variant, n, family.n)
                continue
            else:
                row = _mv_row(variant, family, n, rng, primes)
            rows.append(row if timing else BenchRow(*astuple(row)[:-1], 0.0))
    return rows


def write_csv(rows: Iterable[BenchRow], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow((row.variant, row.n, row.k, row.q, row.bytes_total, f"{row.wall_ms:.3f}"))
