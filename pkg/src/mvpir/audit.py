"""Exact privacy audit by enumerating the user's randomness.

For every index tau the audit pushes *all* z in Z_m^k through the query
generator and histograms what each server receives.  Privacy holds exactly
when, for each server slot, the histograms for different tau coincide,
i.e. the total-variation distance between them is 0.

``query_fn(tau, Z)`` receives the full (m^k x k) array of z values and
returns one (m^k x k) array of queries per server; supplying a custom one
lets tests inject a faulty generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterError
from .schemes import BASELINE, SchemeConfig

DEFAULT_LIMIT = 10 ** 6


@dataclass(frozen=True)
class AuditReport:
    variant: str
    taus: tuple[int, ...]
    space: int
    per_server: tuple[Fraction, ...]

    @property
    def max_tv(self) -> Fraction:
        return max(self.per_server, default=Fraction(0))

    @property
    def private(self) -> bool:
        return self.max_tv == 0


def default_query_fn(cfg: SchemeConfig, source) -> Callable:
    """Honest generator: z + t_i·v_tau (or φ(tau) + t_i·z for the baseline)."""
    mod = cfg.m
    if cfg.variant == BASELINE:
        def fn(tau, Z):
            base = np.array(source.point(tau), dtype=np.int64)
            return [(base + t * Z) % mod for t in cfg.t_values]
    else:
        def fn(tau, Z):
            v = np.array(source.V[tau], dtype=np.int64)
            return [(Z + t * v) % mod for t in cfg.t_values]
    return fn


def privacy_audit(cfg: SchemeConfig, source, tau_list: Sequence[int],
                  query_fn: Optional[Callable] = None, limit: int = DEFAULT_LIMIT) -> AuditReport:
    """Largest total-variation distance between query distributions of any two taus.

    ``source`` is the MVFamily (or, for the baseline, the CubicDatabase)
    that determines the queries.
    """
    mod, k = cfg.m, source.k
    space = mod ** k
    if space > limit:
        raise ParameterError(
            f"enumerating {mod}^{k} = {space} random strings exceeds the limit of {limit}; "
            f"audit a family with smaller k")
    query_fn = query_fn or default_query_fn(cfg, source)
    Z = np.indices((mod,) * k, dtype=np.int64).reshape(k, -1).T
    weights = mod ** np.arange(k, dtype=np.int64)[::-1]
    hists = {}
    for tau in tau_list:
        per_server = query_fn(tau, Z)
        hists[tau] = [np.bincount(q @ weights, minlength=space) for q in per_server]
    slots = cfg.q
    worst = [Fraction(0)] * slots
    for a, b in combinations(tau_list, 2):
        for j in range(slots):
            diff = int(np.abs(hists[a][j] - hists[b][j]).sum())
            worst[j] = max(worst[j], Fraction(diff, 2 * len(Z)))
    return AuditReport(cfg.variant, tuple(tau_list), space, tuple(worst))
