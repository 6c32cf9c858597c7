"""Large-network limits of the push walk.

With ``mu`` the limiting susceptible fraction, the scaled walk ``S_{nt}/n``
follows the fluid path ``mu (1 - exp(-c t))`` with Gaussian fluctuations of
order ``1/sqrt(n)``.  One push round lasts ``1 - mu`` units of scaled time.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy import special

from .errors import BoundaryWarning, DomainError
from .model import NetworkConfig

#: Default stopping rule for :func:`fluid_rounds`.
FLUID_ROUNDS_MAX = 200
FLUID_ROUNDS_TOL = 1e-12
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class MeanComparison:
    pull_mean: float
    push_mean: float
    gap: float


@dataclass(frozen=True)
class FluidRoundLevels:
    """Infected proportions ``phi_0, phi_1, ...`` after each fluid-limit round."""

    levels: tuple

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]


@dataclass(frozen=True)
class AsymptoticRegime:
    """Limit parameters: susceptible fraction ``mu`` in (0, 1) and fanout ``c``."""

    mu: float
    c: int

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise DomainError(f"mu must lie in (0, 1), got {self.mu}")
        if isinstance(self.c, bool) or int(self.c) != self.c or self.c < 1:
            raise DomainError(f"c must be a positive integer, got {self.c}")
        object.__setattr__(self, "c", int(self.c))

    @classmethod
    def from_config(cls, cfg: NetworkConfig) -> "AsymptoticRegime":
        return cls(cfg.susceptible / cfg.n, cfg.c)

    @property
    def round_time(self) -> float:
        """Scaled duration of the first push round, ``1 - mu``."""
        return 1.0 - self.mu

    def gamma(self, t: float) -> float:
        """Fluid path ``mu (1 - exp(-c t))``."""
        _nonneg(t)
        return -self.mu * math.expm1(-self.c * t)

    def sigma(self, t: float) -> float:
        _nonneg(t)
        rest = self.mu * math.exp(-self.c * t)
        return math.sqrt(self.c * rest * (1.0 - rest))

    def quadratic_variation(self, t: float) -> float:
        """``mu (exp(c t) - 1 - mu c t)``, the variance of the undiscounted martingale."""
        _nonneg(t)
        ct = self.c * t
        return self.mu * (math.expm1(ct) - self.mu * ct)

    def var_x(self, t: float) -> float:
        """Variance of the diffusion limit at time ``t``."""
        return math.exp(-2.0 * self.c * t) * self.quadratic_variation(t)

    def tau_bar(self, lam: float) -> float:
        """First time the fluid path reaches ``lam``: ``-(1/c) log(1 - lam/mu)``."""
        if not 0.0 < lam < self.mu:
            raise DomainError(f"level {lam} not reachable by the fluid path (needs 0 < lam < mu={self.mu})")
        return -math.log1p(-lam / self.mu) / self.c

    def hitting_variance(self, lam: float) -> float:
        """Limit variance ``v`` of ``(tau_lam - n tau_bar) / sqrt(n)``."""
        t = self.tau_bar(lam)
        return self.var_x(t) / (self.c * (self.mu - lam)) ** 2

    def t_n(self, n: int, C: float) -> float:
        r"""Time at which the fluid path sits ``C`` standard deviations below the round-end level.

        Solves ``Gamma(1-mu) - Gamma(t) = C sqrt(var_x(1-mu) / n)``.
        """
        if C < 0:
            raise DomainError(f"C must be >= 0, got {C}")
        if n < 1:
            raise DomainError(f"n must be positive, got {n}")
        end = self.round_time
        arg = (self.mu - self.gamma(end) + C * math.sqrt(self.var_x(end) / n)) / self.mu
        if not 0.0 < arg < 1.0:
            raise DomainError(f"C={C} too large for n={n}: t_n would not be positive")
        return -math.log(arg) / self.c

    def mean_comparison(self) -> MeanComparison:
        """Limit mean newly infected fraction of one pull round versus one push round."""
        pull = self.mu * -math.expm1(self.c * math.log(self.mu))
        push = self.gamma(self.round_time)
        return MeanComparison(pull, push, pull - push)

    def fluid_rounds(self, i_max: int | None = None) -> FluidRoundLevels:
        """``phi_0 = 1 - mu`` and ``phi_i = phi_0 + Gamma(phi_0 + ... + phi_{i-1})``.

        Without ``i_max`` the sequence stops once ``1 - phi_i < 1e-12`` or
        after 200 rounds.
        """
        if i_max is not None and i_max < 0:
            raise DomainError(f"i_max must be >= 0, got {i_max}")
        phi0 = self.round_time
        levels = [phi0]
        elapsed = phi0
        limit = FLUID_ROUNDS_MAX if i_max is None else i_max
        while len(levels) <= limit:
            if i_max is None and 1.0 - levels[-1] < FLUID_ROUNDS_TOL:
                break
            nxt = phi0 + self.gamma(elapsed)
            levels.append(nxt)
            elapsed += nxt
        return FluidRoundLevels(tuple(levels))

    def nu_bar(self, lam: float) -> int:
        """Fluid-limit number of rounds to reach infected proportion ``lam``."""
        if not 0.0 < lam < 1.0:
            raise DomainError(f"level must lie in (0, 1), got {lam}")
        phi0 = self.round_time
        i, phi, elapsed = 0, phi0, phi0
        while True:
            if abs(lam - phi) < BOUNDARY_TOL:
                warnings.warn(f"level {lam} is within {BOUNDARY_TOL} of fluid round level phi_{i}={phi}",
                              BoundaryWarning, stacklevel=2)
            if phi >= lam:
                return i
            if 1.0 - phi < FLUID_ROUNDS_TOL or i >= 10_000:
                raise DomainError(f"level {lam} not reached by the fluid rounds")
            phi = phi0 + self.gamma(elapsed)
            elapsed += phi
            i += 1


def _nonneg(t: float) -> None:
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")


gamma_fluid = AsymptoticRegime.gamma
sigma_fluid = AsymptoticRegime.sigma
var_x = AsymptoticRegime.var_x
tau_bar = AsymptoticRegime.tau_bar
hitting_variance = AsymptoticRegime.hitting_variance
t_n = AsymptoticRegime.t_n
mean_comparison = AsymptoticRegime.mean_comparison
fluid_rounds = AsymptoticRegime.fluid_rounds
nu_bar = AsymptoticRegime.nu_bar


def gaussian_tail_bound(C: float) -> float:
    """``sqrt(2/pi) * integral_C^inf exp(-x^2/2) dx = erfc(C / sqrt 2)``."""
    return float(special.erfc(C / math.sqrt(2.0)))


def normal_approx_y(cfg: NetworkConfig) -> tuple[float, float]:
    """Mean and variance of the Gaussian approximation to ``Y(n, k)`` with ``mu = (n-k)/n``."""
    reg = AsymptoticRegime.from_config(cfg)
    t = reg.round_time
    return cfg.n * reg.gamma(t), cfg.n * reg.var_x(t)
