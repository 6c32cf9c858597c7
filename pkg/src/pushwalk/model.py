"""Domain types and the one-step law of the selection walk.

The walk ``S_l`` counts nodes newly infected after ``l`` random selections.
A selection is made by one infected node choosing ``c`` distinct peers among
the other ``n - 1`` nodes; the number of fresh infections it causes is
hypergeometric.  Because the law only depends on the current *total*
infected count ``a = k + S_l``, step laws are tabulated by ``a`` and shared
between every starting point ``k`` with the same ``(n, c)``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import numpy as np

from .errors import ConfigError, DomainError

# Exact rational step laws are used up to this network size.
EXACT_N_MAX = 64
#: Probabilities below this are flushed to zero during propagation.
FLUSH_BELOW = 1e-300

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class NetworkConfig:
    """A complete network of ``n`` nodes, ``k`` of them infected, fanout ``c``."""

    n: int
    k: int
    c: int

    def __post_init__(self):
        for name in ("n", "k", "c"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got n={self.n}")
        if not 1 <= self.k <= self.n - 1:
            raise ConfigError(f"k must satisfy 1 <= k <= n-1, got k={self.k}, n={self.n}")
        if not 1 <= self.c <= self.n - 1:
            raise ConfigError(f"c must satisfy 1 <= c <= n-1, got c={self.c}, n={self.n}")

    @property
    def susceptible(self) -> int:
        return self.n - self.k

    def with_k(self, k: int) -> "NetworkConfig":
        return NetworkConfig(self.n, k, self.c)


def validate_config(n, k, c) -> NetworkConfig:
    """Return a validated :class:`NetworkConfig`; raise :class:`ConfigError` otherwise."""
    return NetworkConfig(n, k, c)


def _is_exact(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


class Pmf:
    """Probability mass function on ``offset, offset + 1, ...``.

    ``probs`` is either a float array or a tuple of :class:`Fraction` for
    exact laws.  Construction trims zero mass at both ends and checks that
    the entries are non-negative and sum to one within ``1e-9``.
    """

    __slots__ = ("offset", "probs")

    def __init__(self, offset: int, probs):
        if isinstance(probs, np.ndarray):
            values = np.asarray(probs, dtype=float)
            nz = np.flatnonzero(values)
            if nz.size == 0:
                raise DomainError("a pmf needs at least one positive entry")
            lo, hi = int(nz[0]), int(nz[-1])
            values = values[lo:hi + 1].copy()
            values.setflags(write=False)
            if values.min() < 0:
                raise DomainError("pmf entries must be non-negative")
            total = math.fsum(values)
        else:
            values = tuple(probs)
            nz = [i for i, p in enumerate(values) if p != 0]
            if not nz:
                raise DomainError("a pmf needs at least one positive entry")
            lo, hi = nz[0], nz[-1]
            values = values[lo:hi + 1]
            if any(p < 0 for p in values):
                raise DomainError("pmf entries must be non-negative")
            total = sum(values)
        if abs(total - 1) > 1e-9:
            raise DomainError(f"pmf entries sum to {float(total)!r}, not 1")
        self.offset = int(offset) + lo
        self.probs = values

    @classmethod
    def point_mass(cls, value: int) -> "Pmf":
        return cls(value, (Fraction(1),))

    @classmethod
    def from_dict(cls, mapping: dict) -> "Pmf":
        lo, hi = min(mapping), max(mapping)
        exact = all(_is_exact(p) for p in mapping.values())
        if exact:
            return cls(lo, tuple(Fraction(mapping.get(x, 0)) for x in range(lo, hi + 1)))
        return cls(lo, np.array([float(mapping.get(x, 0.0)) for x in range(lo, hi + 1)]))

    @property
    def exact(self) -> bool:
        return not isinstance(self.probs, np.ndarray)

    @property
    def support(self) -> range:
        return range(self.offset, self.offset + len(self.probs))

    @property
    def min(self) -> int:
        return self.offset

    @property
    def max(self) -> int:
        return self.offset + len(self.probs) - 1

    def __len__(self):
        return len(self.probs)

    def __call__(self, x: int):
        i = x - self.offset
        if 0 <= i < len(self.probs):
            return self.probs[i]
        return Fraction(0) if self.exact else 0.0

    def __repr__(self):
        return f"Pmf(offset={self.offset}, probs={list(self.probs)!r})"

    def __eq__(self, other):
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.offset == other.offset and list(self.probs) == list(other.probs)

    def as_dict(self) -> dict:
        if self.exact:
            return {x: p for x, p in zip(self.support, self.probs)}
        return {x: float(p) for x, p in zip(self.support, self.probs)}

    def to_float(self) -> "Pmf":
        if not self.exact:
            return self
        return Pmf(self.offset, np.array([float(p) for p in self.probs]))

    def dense(self, size: int | None = None) -> np.ndarray:
        """Float vector indexed from 0 (``size`` defaults to ``max + 1``)."""
        size = self.max + 1 if size is None else size
        out = np.zeros(size)
        out[self.offset:self.max + 1] = [float(p) for p in self.probs]
        return out

    def mean(self):
        if self.exact:
            return sum(x * p for x, p in zip(self.support, self.probs))
        return math.fsum(np.arange(self.offset, self.max + 1) * self.probs)

    def moment(self, order: int):
        if self.exact:
            return sum(x ** order * p for x, p in zip(self.support, self.probs))
        xs = np.arange(self.offset, self.max + 1, dtype=float)
        return math.fsum(xs ** order * self.probs)

    def var(self):
        m = self.mean()
        if self.exact:
            return sum((x - m) ** 2 * p for x, p in zip(self.support, self.probs))
        xs = np.arange(self.offset, self.max + 1, dtype=float)
        return math.fsum((xs - m) ** 2 * self.probs)

    def cdf(self, x: int) -> float:
        return float(sum(p for v, p in zip(self.support, self.probs) if v <= x))

    def tv(self, other: "Pmf") -> float:
        """Total variation distance, computed in floating point."""
        lo = min(self.min, other.min)
        hi = max(self.max, other.max)
        a = np.zeros(hi - lo + 1)
        b = np.zeros(hi - lo + 1)
        a[self.min - lo:self.max - lo + 1] = [float(p) for p in self.probs]
        b[other.min - lo:other.max - lo + 1] = [float(p) for p in other.probs]
        return 0.5 * math.fsum(np.abs(a - b))


@dataclass(frozen=True)
class WalkState:
    """Position of the walk: ``newly_infected`` after ``step`` selections."""

    newly_infected: int
    step: int

    def check(self, cfg: NetworkConfig) -> "WalkState":
        if not 0 <= self.newly_infected <= cfg.susceptible:
            raise DomainError(f"newly infected count {self.newly_infected} outside [0, {cfg.susceptible}]")
        if self.newly_infected > cfg.c * self.step:
            raise DomainError("newly infected count exceeds c * step")
        return self

    def advance(self, fresh: int) -> "WalkState":
        return WalkState(self.newly_infected + fresh, self.step + 1)


def _check_state(cfg: NetworkConfig, i: int) -> None:
    if not 0 <= i <= cfg.susceptible:
        raise DomainError(f"state i={i} outside [0, n-k={cfg.susceptible}]")


def step_support(cfg: NetworkConfig, i: int) -> tuple[int, int]:
    """Inclusive bounds of the fresh-infection count from state ``i``."""
    _check_state(cfg, i)
    lo = max(0, cfg.c - (cfg.k + i - 1))
    hi = min(cfg.c, cfg.n - (cfg.k + i))
    return lo, hi


def exact_step_pmf(cfg: NetworkConfig, i: int) -> Pmf:
    """Rational law of the fresh infections caused by one selection from state ``i``."""
    lo, hi = step_support(cfg, i)
    infected_others = cfg.k - 1 + i
    susceptible = cfg.n - cfg.k - i
    total = math.comb(cfg.n - 1, cfg.c)
    probs = tuple(
        Fraction(math.comb(infected_others, cfg.c - j) * math.comb(susceptible, j), total)
        for j in range(lo, hi + 1)
    )
    return Pmf(lo, probs)


def step_pmf(cfg: NetworkConfig, i: int) -> Pmf:
    """Law of the fresh infections caused by one selection from state ``i``.

    Rational for ``n <= 64``; floating point (tabulated) otherwise.  The
    state ``i = n - k`` is legal and gives the point mass at zero.
    """
    if cfg.n <= EXACT_N_MAX:
        return exact_step_pmf(cfg, i)
    lo, hi = step_support(cfg, i)
    row = step_table(cfg.n, cfg.c)[cfg.k + i]
    return Pmf(lo, np.array(row[lo:hi + 1]))


def _log_falling(base: np.ndarray, depth: int) -> np.ndarray:
    """``out[r, m] = log(base[r] * (base[r]-1) * ... * (base[r]-m+1))``; ``-inf`` once a factor hits 0."""
    t = np.arange(depth)
    with np.errstate(divide="ignore"):
        logs = np.log(np.maximum(base[:, None] - t[None, :], 0.0))
    out = np.zeros((base.size, depth + 1))
    np.cumsum(logs, axis=1, out=out[:, 1:])
    return out


def _build_step_table(n: int, c: int) -> np.ndarray:
    a = np.arange(n + 1)
    if n <= EXACT_N_MAX:
        table = np.zeros((n + 1, c + 1))
        total = math.comb(n - 1, c)
        for infected in range(1, n + 1):
            for j in range(c + 1):
                num = math.comb(infected - 1, c - j) * math.comb(n - infected, j)
                table[infected, j] = num / total
    else:
        # P(j) = C(c, j) * ff(A, c-j) * ff(B, j) / ff(n-1, c), ff = falling factorial
        log_a = _log_falling((a - 1).astype(float), c)
        log_b = _log_falling((n - a).astype(float), c)
        log_d = math.fsum(math.log(n - 1 - t) for t in range(c))
        j = np.arange(c + 1)
        log_binom = np.array([math.lgamma(c + 1) - math.lgamma(x + 1) - math.lgamma(c - x + 1) for x in j])
        with np.errstate(invalid="ignore"):
            table = np.exp(log_binom[None, :] + log_a[:, c - j] + log_b[:, j] - log_d)
        table[0] = 0.0
        table[1:] /= table[1:].sum(axis=1, keepdims=True)
    # row 0 is never visited (k >= 1); keep it a valid law
    table[0] = 0.0
    table[0, 0] = 1.0
    return np.ascontiguousarray(table)


_table_lock = threading.Lock()


@lru_cache(maxsize=16)
def _cached_tables(n: int, c: int) -> tuple[np.ndarray, np.ndarray]:
    table = _build_step_table(n, c)
    cdf = np.ascontiguousarray(np.cumsum(table, axis=1))
    # inverse-CDF sampling must never run past the last supported value
    for row_c, row_p in zip(cdf, table):
        last = int(np.flatnonzero(row_p)[-1])
        row_c[last:] = 1.0
    table.setflags(write=False)
    cdf.setflags(write=False)
    return table, cdf


def step_table(n: int, c: int) -> np.ndarray:
    """``(n + 1, c + 1)`` array; row ``a`` is the step law when ``a`` nodes are infected."""
    with _table_lock:
        return _cached_tables(n, c)[0]


def step_cdf_table(n: int, c: int) -> np.ndarray:
    """Row-wise cumulative sums of :func:`step_table`, clamped to 1 at the top of the support."""
    with _table_lock:
        return _cached_tables(n, c)[1]


def mix64(seed: int, index: int) -> int:
    """SplitMix64 finalizer applied to ``seed + (index + 1) * golden``.

    Replication ``r`` of a run seeded with ``seed`` draws from
    ``PCG64(mix64(seed, r))``.  This is part of the reproducibility contract.
    """
    z = (int(seed) + (int(index) + 1) * _GOLDEN64) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


MIX_FUNCTION = "splitmix64(seed + (r + 1) * 0x9E3779B97F4A7C15) -> PCG64"


def make_rng(seed: int, index: int | None = None) -> np.random.Generator:
    """PCG64 generator for ``seed`` (or for replication ``index`` of ``seed``)."""
    state = int(seed) & _MASK64 if index is None else mix64(seed, index)
    return np.random.Generator(np.random.PCG64(state))


def sample_step(cfg: NetworkConfig, i: int, rng: np.random.Generator) -> int:
    """Draw fresh infections from state ``i`` by inverse CDF, consuming one uniform."""
    _check_state(cfg, i)
    row = step_cdf_table(cfg.n, cfg.c)[cfg.k + i]
    u = rng.random()
    return int(np.searchsorted(row, u, side="right"))

