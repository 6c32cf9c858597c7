"""Round-level quantities: the infected-count chain ``I_m`` and round counts.

``I_m = I_{m-1} + Y_m`` where ``Y_m`` given ``I_{m-1} = j`` is the one-round
law started from ``j`` infected nodes (push: walk law, pull: binomial).
Those per-``j`` laws are the rows of the round kernel, computed lazily and
cached per ``(n, c, algorithm)``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import exact
from .errors import DegenerateError, DomainError
from .model import NetworkConfig, Pmf

ALGORITHMS = ("push", "pull")


def _check_algorithm(algorithm: str) -> str:
    if algorithm not in ALGORITHMS:
        raise DomainError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    return algorithm


@dataclass(frozen=True)
class LevelTarget:
    """Infection level ``lam``; ``target`` is the node count ``ceil(lam * n)`` it requires."""

    lam: float
    n: int

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise DomainError(f"level must lie in (0, 1], got {self.lam}")

    @property
    def target(self) -> int:
        # rounding first keeps lam = j/n from landing on j + 1
        return min(self.n, math.ceil(round(self.lam * self.n, 9)))

    def met_by(self, infected: int) -> bool:
        return infected >= self.target


def resolve_level(lam: float, n: int) -> int:
    return LevelTarget(lam, n).target


class RoundKernel:
    """Cached one-round laws ``row(j)[i] = P(Y(n, j) = i)`` for ``j = 1..n``."""

    def __init__(self, n: int, c: int, algorithm: str):
        self.n, self.c, self.algorithm = n, c, _check_algorithm(algorithm)
        self._rows: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def _compute(self, j: int) -> np.ndarray:
        if j == self.n:
            return np.ones(1)
        cfg = NetworkConfig(self.n, j, self.c)
        if self.algorithm == "push":
            dist, _ = exact._propagate_dense(cfg, j)
            return dist / math.fsum(dist)
        return exact.pull_distribution(cfg).dense(self.n - j + 1)

    def row(self, j: int) -> np.ndarray:
        with self._lock:
            cached = self._rows.get(j)
        if cached is None:
            cached = self._compute(j)
            cached.setflags(write=False)
            with self._lock:
                cached = self._rows.setdefault(j, cached)
        return cached


@lru_cache(maxsize=64)
def round_kernel(n: int, c: int, algorithm: str) -> RoundKernel:
    return RoundKernel(n, c, algorithm)


@dataclass(frozen=True)
class RoundChainState:
    """Law of the total infected count after round ``m``."""

    m: int
    pmf: Pmf


def _chain_step(kernel: RoundKernel, v: np.ndarray) -> np.ndarray:
    n = kernel.n
    out = np.zeros(n + 1)
    for j in np.flatnonzero(v):
        row = kernel.row(int(j))
        out[j:j + row.size] += v[j] * row
    return out


def round_chain_distribution(cfg: NetworkConfig, m: int, algorithm: str = "push") -> RoundChainState:
    if m < 0:
        raise DomainError(f"round index must be >= 0, got {m}")
    kernel = round_kernel(cfg.n, cfg.c, _check_algorithm(algorithm))
    v = np.zeros(cfg.n + 1)
    v[cfg.k] = 1.0
    for _ in range(m):
        v = _chain_step(kernel, v)
    return RoundChainState(m, Pmf(0, v / math.fsum(v)))


def _sweep(kernel: RoundKernel, k: int, target: int) -> float:
    if target <= k:
        return 0.0
    # N[x] for x in [k, target); N[target..] = 0
    N = np.zeros(target - k + 1)
    for x in range(target - 1, k - 1, -1):
        row = kernel.row(x)
        stay = row[0]
        if stay >= 1.0:
            raise DegenerateError(f"no progress possible from {x} infected nodes")
        width = target - x - 1
        hits = row[1:1 + width]
        acc = 1.0 + float(np.dot(N[x - k + 1:x - k + 1 + hits.size], hits))
        N[x - k] = acc / (1.0 - stay)
    return float(N[0])


def expected_rounds_to_level(cfg: NetworkConfig, lam: float, algorithm: str = "push") -> float:
    """Expected number of rounds until at least ``ceil(lam n)`` nodes are infected."""
    target = resolve_level(lam, cfg.n)
    return _sweep(round_kernel(cfg.n, cfg.c, _check_algorithm(algorithm)), cfg.k, target)


def expected_rounds_curve(cfg: NetworkConfig, lams=None, algorithm: str = "push") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(lams, targets, N)`` over a level grid (default ``j/n`` for ``j = 1..n``)."""
    if lams is None:
        lams = np.arange(1, cfg.n + 1) / cfg.n
    lams = np.asarray(lams, dtype=float)
    kernel = round_kernel(cfg.n, cfg.c, _check_algorithm(algorithm))
    targets = np.array([resolve_level(x, cfg.n) for x in lams])
    cache: dict[int, float] = {}
    values = np.empty(lams.size)
    for idx, t in enumerate(targets):
        t = int(t)
        if t not in cache:
            cache[t] = _sweep(kernel, cfg.k, t)
        values[idx] = cache[t]
    return lams, targets, values


@dataclass(frozen=True)
class RoundCountLaw:
    """``probs[m] = P(nu = m)`` for ``m = 0..m_max``; ``residual = P(nu > m_max)``."""

    target: int
    probs: np.ndarray
    residual: float

    @property
    def m_max(self) -> int:
        return self.probs.size - 1

    def truncated_mean(self) -> float:
        return math.fsum(np.arange(self.probs.size) * self.probs)

    def mean_lower_bound(self) -> float:
        return self.truncated_mean() + (self.m_max + 1) * self.residual


def round_count_distribution(cfg: NetworkConfig, lam: float, m_max: int,
                             algorithm: str = "push") -> RoundCountLaw:
    """Law of the number of rounds needed to reach level ``lam``, truncated at ``m_max``."""
    if m_max < 1:
        raise DomainError(f"m_max must be >= 1, got {m_max}")
    target = resolve_level(lam, cfg.n)
    kernel = round_kernel(cfg.n, cfg.c, _check_algorithm(algorithm))
    v = np.zeros(cfg.n + 1)
    v[cfg.k] = 1.0
    reached = [math.fsum(v[target:])]
    for _ in range(m_max):
        if reached[-1] >= 1.0:
            reached.append(1.0)
            continue
        v = _chain_step(kernel, v)
        reached.append(min(1.0, math.fsum(v[target:])))
    reached = np.maximum.accumulate(np.array(reached))
    probs = np.diff(np.concatenate([[0.0], reached]))
    return RoundCountLaw(target, probs, max(0.0, 1.0 - reached[-1]))
