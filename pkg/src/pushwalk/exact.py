"""Exact finite-network laws of the push round and its building blocks.

``walk_distribution`` is the workhorse: it pushes a probability vector
through the sparse transition matrix of the selection walk one step at a
time (never forming the matrix).  The two oracles below it compute the same
laws in exact rational arithmetic by independent routes and exist mainly
for cross-checking.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from ._backend import kernels
from .errors import DomainError, ResourceError
from .model import NetworkConfig, Pmf, exact_step_pmf, step_table

#: Largest ``k`` accepted by :func:`stirling_oracle` unless overridden.
STIRLING_K_MAX = 1000
#: Largest ``n`` accepted by :func:`enumeration_oracle`.
ENUMERATION_N_MAX = 30


@dataclass(frozen=True)
class TransitionRow:
    """Row ``source`` of the walk's transition matrix as ``{target: prob}``."""

    source: int
    entries: dict


def transition_row(cfg: NetworkConfig, i: int) -> TransitionRow:
    law = exact_step_pmf(cfg, i)
    return TransitionRow(i, {i + j: p for j, p in law.as_dict().items()})


def _propagate_dense(cfg: NetworkConfig, steps: int, tail_level: int = -1):
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    dist = np.zeros(cfg.susceptible + 1)
    dist[0] = 1.0
    table = step_table(cfg.n, cfg.c)
    lo, hi, tails = kernels.propagate(dist, table, cfg.k, steps, 0, 0, tail_level)
    return dist, tails


def walk_distribution(cfg: NetworkConfig, steps: int) -> Pmf:
    """Law of ``S_steps``, the newly infected count after ``steps`` selections."""
    dist, _ = _propagate_dense(cfg, steps)
    dist /= math.fsum(dist)
    return Pmf(0, dist)


def y_distribution(cfg: NetworkConfig) -> Pmf:
    """Law of ``Y(n, k)``, the newly infected count after one push round."""
    return walk_distribution(cfg, cfg.k)


def hitting_time_survival(cfg: NetworkConfig, level: int, max_steps: int | None = None,
                          tol: float = 1e-15) -> np.ndarray:
    """``out[l] = P(tau > l)`` for ``tau = inf{l : S_l >= level}``.

    The walk only moves up, so ``P(tau <= l) = P(S_l >= level)``.  Steps are
    added until the survival drops below ``tol`` or ``max_steps`` is hit.
    """
    if not 0 <= level <= cfg.susceptible:
        raise DomainError(f"level {level} unreachable: needs 0 <= level <= n-k={cfg.susceptible}")
    if level == 0:
        return np.zeros(1)
    dist = np.zeros(cfg.susceptible + 1)
    dist[0] = 1.0
    table = step_table(cfg.n, cfg.c)
    lo, hi = 0, 0
    out = [1.0]
    chunk = max(16, level // max(cfg.c, 1))
    limit = max_steps if max_steps is not None else 10**9
    while out[-1] > tol and len(out) - 1 < limit:
        steps = min(chunk, limit - (len(out) - 1))
        lo, hi, tails = kernels.propagate(dist, table, cfg.k, steps, lo, hi, level)
        out.extend(1.0 - tails)
    return np.clip(np.array(out), 0.0, 1.0)


def hitting_time_mean_var(cfg: NetworkConfig, level: int) -> tuple[float, float]:
    """Exact mean and variance of the first selection index reaching ``level``."""
    surv = hitting_time_survival(cfg, level)
    ls = np.arange(surv.size)
    mean = math.fsum(surv)
    second = math.fsum((2 * ls + 1) * surv)
    return mean, second - mean * mean


_stirling_lock = threading.Lock()
_stirling_rows: list[list[int]] = [[1]]


def stirling2(m: int, j: int) -> int:
    """Stirling number of the second kind ``S(m, j)`` from a cached exact table."""
    if j < 0 or j > m:
        return 0
    with _stirling_lock:
        rows = _stirling_rows
        while len(rows) <= m:
            prev = rows[-1]
            r = len(rows)
            row = [0] * (r + 1)
            for x in range(1, r + 1):
                row[x] = x * (prev[x] if x < r else 0) + prev[x - 1]
            rows.append(row)
        return rows[m][j]


def stirling_oracle(n: int, k: int, k_max: int = STIRLING_K_MAX) -> Pmf:
    """Rational law of ``Y(n, k)`` for fanout 1 from the closed Stirling-number form."""
    NetworkConfig(n, k, 1)
    if k > k_max:
        raise ResourceError(f"stirling_oracle limited to k <= {k_max}, got k={k}")
    denom = (n - 1) ** k
    probs = []
    for i in range(0, min(k, n - k) + 1):
        acc = 0
        for k1 in range(i, k + 1):
            acc += math.comb(k, k1) * (k - 1) ** (k - k1) * stirling2(k1, i)
        probs.append(Fraction(math.comb(n - k, i) * math.factorial(i) * acc, denom))
    return Pmf(0, tuple(probs))


def enumeration_oracle(cfg: NetworkConfig, steps: int) -> Pmf:
    """Rational law of ``S_steps`` by expanding every selection outcome.

    Paths are merged on their current state after each step, so the cost is
    ``O(steps * (n - k) * (c + 1))`` big-rational operations.
    """
    if cfg.n > ENUMERATION_N_MAX:
        raise ResourceError(f"enumeration_oracle limited to n <= {ENUMERATION_N_MAX}, got n={cfg.n}")
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    laws = {}
    current = {0: Fraction(1)}
    for _ in range(steps):
        nxt: dict[int, Fraction] = {}
        for i, p in current.items():
            if i not in laws:
                laws[i] = exact_step_pmf(cfg, i).as_dict()
            for j, q in laws[i].items():
                nxt[i + j] = nxt.get(i + j, Fraction(0)) + p * q
        current = nxt
    return Pmf.from_dict(current)


def pull_failure_probability(n: int, infected: int, c: int) -> float:
    """``C(n - infected - 1, c) / C(n - 1, c)``: chance a susceptible picks no infected peer."""
    s = n - infected - 1
    if s < c:
        return 0.0
    p = 1.0
    for t in range(c):
        p *= (s - t) / (n - 1 - t)
    return p


def pull_distribution(cfg: NetworkConfig) -> Pmf:
    """Law of the newly infected count after one pull round: Binomial(n-k, 1-p)."""
    p_fail = pull_failure_probability(cfg.n, cfg.k, cfg.c)
    trials = cfg.susceptible
    if p_fail == 0.0:
        return Pmf.point_mass(trials)
    probs = stats.binom.pmf(np.arange(trials + 1), trials, 1.0 - p_fail)
    return Pmf(0, probs / math.fsum(probs))


def pull_distribution_exact(cfg: NetworkConfig) -> Pmf:
    p_fail = Fraction(math.comb(cfg.n - cfg.k - 1, cfg.c), math.comb(cfg.n - 1, cfg.c))
    m = cfg.susceptible
    return Pmf(0, tuple(math.comb(m, i) * (1 - p_fail) ** i * p_fail ** (m - i) for i in range(m + 1)))
