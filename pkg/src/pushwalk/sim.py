"""Reproducible Monte Carlo simulation of push and pull round chains.

Replication ``r`` of a run with seed ``s`` owns the generator
``PCG64(mix64(s, r))`` (see :func:`pushwalk.model.mix64`), so results do
not depend on how replications are scheduled across threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import __version__
from ._backend import kernels
from .errors import CensoredError, ConfigError, DomainError
from .exact import pull_failure_probability
from .model import MIX_FUNCTION, NetworkConfig, Pmf, mix64, step_cdf_table
from .rounds import ALGORITHMS, resolve_level

THREADS_ENV = "PUSHWALK_THREADS"
CENSORED = -1


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


@dataclass(frozen=True)
class SimConfig:
    """What to simulate.

    ``levels`` are infected proportions.  For each one the run records the
    round count ``nu`` (first round with ``I_m >= ceil(lam n)``) and, for
    push, the selection count ``tau`` (first selection with
    ``S_l >= ceil(lam n)`` newly infected nodes).  ``track_rounds`` rounds
    are always simulated so the mean trajectory of ``I_m`` is available up
    to that round.
    """

    cfg: NetworkConfig
    algorithm: str = "push"
    replications: int = 1000
    seed: int = 0
    levels: tuple = ()
    max_rounds: int = 1000
    track_rounds: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if int(self.replications) < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        levels = tuple(float(x) for x in self.levels)
        for lam in levels:
            if not 0.0 < lam <= 1.0:
                raise ConfigError(f"levels must lie in (0, 1], got {lam}")
        object.__setattr__(self, "levels", levels)
        if int(self.max_rounds) < 1:
            raise ConfigError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if not 1 <= int(self.track_rounds) <= int(self.max_rounds):
            raise ConfigError(f"track_rounds must lie in [1, max_rounds], got {self.track_rounds}")

    @property
    def thresholds(self) -> tuple:
        return tuple(resolve_level(lam, self.cfg.n) for lam in self.levels)


@dataclass(frozen=True)
class ReplicationResult:
    """One trajectory.  ``tau[i]`` is None where undefined, -1 where censored."""

    index: int
    y: int
    tau: tuple
    nu: tuple
    trajectory: np.ndarray
    rounds_run: int
    selections: int | None

    @property
    def censored(self) -> bool:
        return any(v == CENSORED for v in self.nu) or any(v == CENSORED for v in self.tau if v is not None)


def _push_replication(sc: SimConfig, r: int) -> ReplicationResult:
    cfg = sc.cfg
    thresholds = sc.thresholds
    tau_idx = [i for i, t in enumerate(thresholds) if t <= cfg.susceptible]
    tau_levels = np.array(sorted({thresholds[i] for i in tau_idx}), dtype=np.int64)
    nu_levels = np.array(sorted(set(thresholds)), dtype=np.int64)
    tau_out = np.full(tau_levels.size, CENSORED, dtype=np.int64)
    nu_out = np.full(nu_levels.size, CENSORED, dtype=np.int64)
    traj = np.zeros(sc.track_rounds + 1, dtype=np.int64)
    bitgen = np.random.PCG64(mix64(sc.seed, r))
    rounds_run, selections = kernels.push_replication(
        cfg.n, cfg.k, step_cdf_table(cfg.n, cfg.c), bitgen,
        tau_levels, tau_out, nu_levels, nu_out, traj, sc.max_rounds)
    tau_map = dict(zip(tau_levels.tolist(), tau_out.tolist()))
    nu_map = dict(zip(nu_levels.tolist(), nu_out.tolist()))
    tau = tuple(tau_map[t] if t <= cfg.susceptible else None for t in thresholds)
    nu = tuple(nu_map[t] for t in thresholds)
    return ReplicationResult(r, int(traj[1] - cfg.k), tau, nu, traj, int(rounds_run), int(selections))


def _pull_replication(sc: SimConfig, r: int) -> ReplicationResult:
    cfg = sc.cfg
    n = cfg.n
    gen = np.random.Generator(np.random.PCG64(mix64(sc.seed, r)))
    thresholds = sc.thresholds
    nu = [0 if t <= cfg.k else CENSORED for t in thresholds]
    traj = np.zeros(sc.track_rounds + 1, dtype=np.int64)
    traj[0] = a = cfg.k
    m = 0
    while m < sc.max_rounds and a < n:
        if m >= sc.track_rounds and CENSORED not in nu:
            break
        m += 1
        a += int(gen.binomial(n - a, 1.0 - pull_failure_probability(n, a, cfg.c)))
        for i, t in enumerate(thresholds):
            if nu[i] == CENSORED and a >= t:
                nu[i] = m
        if m <= sc.track_rounds:
            traj[m] = a
    if a == n:
        traj[m + 1:] = n
    return ReplicationResult(r, int(traj[1] - cfg.k), tuple(None for _ in thresholds), tuple(nu),
                             traj, m, None)


def simulate_round_chain(sc: SimConfig, r: int) -> ReplicationResult:
    """Simulate replication ``r`` of ``sc``."""
    if r < 0:
        raise DomainError(f"replication index must be >= 0, got {r}")
    if sc.algorithm == "push":
        return _push_replication(sc, r)
    return _pull_replication(sc, r)


@dataclass
class SimReport:
    config: SimConfig
    y: np.ndarray
    tau: dict
    nu: dict
    trajectory_mean: np.ndarray
    censored: int
    version: str = __version__
    mix_function: str = MIX_FUNCTION
    replications: list = field(default_factory=list, repr=False)

    @property
    def y_pmf(self) -> Pmf:
        counts = np.bincount(self.y - self.y.min())
        return Pmf(int(self.y.min()), counts / counts.sum())

    @property
    def y_mean(self) -> float:
        return float(np.mean(self.y))

    @property
    def y_var(self) -> float:
        return float(np.var(self.y, ddof=1)) if self.y.size > 1 else 0.0

    def require_uncensored(self) -> "SimReport":
        if self.censored:
            raise CensoredError(f"{self.censored} replication(s) hit max_rounds={self.config.max_rounds}")
        return self

    def summary(self) -> dict:
        out = {
            "replications": int(self.y.size),
            "y_mean": self.y_mean,
            "y_var": self.y_var,
            "censored": int(self.censored),
            "trajectory_mean": [float(x) for x in self.trajectory_mean],
            "levels": [],
        }
        for lam, thr in zip(self.config.levels, self.config.thresholds):
            entry = {"lambda": lam, "threshold": thr}
            for name, table in (("tau", self.tau), ("nu", self.nu)):
                samples = table.get(lam)
                if samples is None:
                    entry[name + "_mean"] = None
                    entry[name + "_var"] = None
                    entry[name + "_censored"] = None
                    continue
                ok = samples[samples != CENSORED]
                entry[name + "_mean"] = float(ok.mean()) if ok.size else None
                entry[name + "_var"] = float(ok.var(ddof=1)) if ok.size > 1 else None
                entry[name + "_censored"] = int((samples == CENSORED).sum())
            out["levels"].append(entry)
        return out


def run_monte_carlo(sc: SimConfig, threads: int | None = None, keep_replications: bool = False) -> SimReport:
    """Run every replication of ``sc`` and aggregate by replication index."""
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    R = int(sc.replications)
    if threads == 1:
        results = [simulate_round_chain(sc, r) for r in range(R)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: simulate_round_chain(sc, r), range(R), chunksize=1))
    results.sort(key=lambda res: res.index)
    y = np.array([res.y for res in results], dtype=np.int64)
    tau, nu = {}, {}
    for i, lam in enumerate(sc.levels):
        nu[lam] = np.array([res.nu[i] for res in results], dtype=np.int64)
        if results[0].tau[i] is not None:
            tau[lam] = np.array([res.tau[i] for res in results], dtype=np.int64)
    traj = np.mean(np.stack([res.trajectory for res in results]), axis=0)
    censored = sum(res.censored for res in results)
    return SimReport(sc, y, tau, nu, traj, censored, replications=results if keep_replications else [])


@dataclass(frozen=True)
class NormalityDiagnostics:
    standardized_mean: float
    variance_ratio: float
    ks_statistic: float
    size: int

    def ks_critical(self, alpha: float = 0.01) -> float:
        return ks_critical_value(self.size, alpha)


def ks_critical_value(size: int, alpha: float) -> float:
    """Exact one-sample two-sided Kolmogorov-Smirnov critical value."""
    return float(stats.kstwo.ppf(1.0 - alpha, size))


def normality_diagnostics(samples, target_mean: float, target_var: float) -> NormalityDiagnostics:
    """Compare ``samples`` with ``N(target_mean, target_var)``.

    Returns the sample mean in standard errors from ``target_mean``, the
    ratio of sample variance to ``target_var`` and the KS statistic.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 100:
        raise DomainError(f"normality diagnostics need at least 100 samples, got {x.size}")
    if not target_var > 0:
        raise DomainError(f"target variance must be positive, got {target_var}")
    sd = math.sqrt(target_var)
    z = (x.mean() - target_mean) / (sd / math.sqrt(x.size))
    ratio = x.var(ddof=1) / target_var
    ks = stats.kstest(x, "norm", args=(target_mean, sd)).statistic
    return NormalityDiagnostics(float(z), float(ratio), float(ks), int(x.size))
