"""First and second moments of the selection walk without its full law.

Taking expectations of ``S_{l+1} = S_l + X_{l+1}`` and its square gives two
linear recursions, ``gamma_{l+1} = a1 gamma_l + a0`` and
``alpha_l = b2 alpha_{l-1} + b1 gamma_{l-1} + b0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import NetworkConfig


@dataclass(frozen=True)
class RecursionCoefficients:
    a0: float
    a1: float
    b0: float
    b1: float
    b2: float


@dataclass(frozen=True)
class MomentSeries:
    """``gamma[l] = E[S_l]`` and ``alpha[l] = E[S_l^2]`` for ``l = 0..L``."""

    gamma: np.ndarray
    alpha: np.ndarray

    @property
    def variance(self) -> np.ndarray:
        # rounding can leave -1e-12 once the walk is absorbed
        return np.maximum(self.alpha - self.gamma ** 2, 0.0)


def coefficients(cfg: NetworkConfig, second: bool = True) -> RecursionCoefficients:
    """Recursion coefficients for fanout ``c``.

    The ``b`` coefficients have ``n - 2`` in their denominators; with
    ``second=False`` they are returned as NaN instead of raising for ``n = 2``.
    """
    n, k, c = cfg.n, cfg.k, cfg.c
    a0 = c * (n - k) / (n - 1)
    a1 = (n - 1 - c) / (n - 1)
    if n < 3:
        if second:
            raise DomainError("second-moment coefficients need n >= 3")
        nan = float("nan")
        return RecursionCoefficients(a0, a1, nan, nan, nan)
    d = (n - 2) * (n - 1)
    b0 = c * ((n - (c + 1)) + (n - k) * (c - 1)) * (n - k) / d
    b1 = c * (n - (c + 1)) * (2 * (n - k) - 1) / d
    b2 = 1 - 2 * c / (n - 1) + c * (c - 1) / d
    return RecursionCoefficients(a0, a1, b0, b1, b2)


def _mean_closed(cfg: NetworkConfig, ls: np.ndarray) -> np.ndarray:
    if cfg.c == cfg.n - 1:
        # a1 = 0: the first selection reaches everyone
        return np.where(ls > 0, float(cfg.susceptible), 0.0)
    # a1^l = exp(l log1p(-c/(n-1))); expm1 keeps small l accurate
    return cfg.susceptible * -np.expm1(ls * np.log1p(-cfg.c / (cfg.n - 1)))


def mean_series(cfg: NetworkConfig, steps: int) -> np.ndarray:
    """``gamma_0 .. gamma_steps`` from the closed form ``(n-k)(1 - a1^l)``."""
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    return _mean_closed(cfg, np.arange(steps + 1, dtype=float))


def mean_series_recursive(cfg: NetworkConfig, steps: int) -> np.ndarray:
    co = coefficients(cfg, second=False)
    out = np.zeros(steps + 1)
    for l in range(steps):
        out[l + 1] = co.a1 * out[l] + co.a0
    return out


def second_moment_series(cfg: NetworkConfig, steps: int) -> np.ndarray:
    """``alpha_0 .. alpha_steps`` by forward recursion from ``alpha_0 = 0``."""
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    co = coefficients(cfg)
    gamma = mean_series(cfg, steps)
    alpha = np.zeros(steps + 1)
    for l in range(1, steps + 1):
        alpha[l] = co.b2 * alpha[l - 1] + co.b1 * gamma[l - 1] + co.b0
    return alpha


def moment_series(cfg: NetworkConfig, steps: int) -> MomentSeries:
    return MomentSeries(mean_series(cfg, steps), second_moment_series(cfg, steps))


def mean_var_y(cfg: NetworkConfig) -> tuple[float, float]:
    """Mean and variance of the newly infected count after one push round."""
    ms = moment_series(cfg, cfg.k)
    mean = float(ms.gamma[-1])
    return mean, float(ms.variance[-1])
