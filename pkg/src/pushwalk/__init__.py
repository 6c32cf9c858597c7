"""Exact, asymptotic and Monte Carlo analysis of push and pull gossip on complete graphs."""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND  # noqa: E402
from .asymptotics import AsymptoticRegime, gaussian_tail_bound, normal_approx_y  # noqa: E402
from .errors import (  # noqa: E402
    BoundaryWarning,
    CensoredError,
    ConfigError,
    DegenerateError,
    DomainError,
    ResourceError,
)
from .exact import (  # noqa: E402
    enumeration_oracle,
    pull_distribution,
    stirling_oracle,
    walk_distribution,
    y_distribution,
)
from .model import NetworkConfig, Pmf, WalkState, sample_step, step_pmf, validate_config  # noqa: E402
from .moments import coefficients, mean_series, mean_var_y, second_moment_series  # noqa: E402
from .rounds import (  # noqa: E402
    expected_rounds_to_level,
    round_chain_distribution,
    round_count_distribution,
)
from .sim import SimConfig, SimReport, normality_diagnostics, run_monte_carlo, simulate_round_chain  # noqa: E402

__all__ = [
    "BACKEND",
    "AsymptoticRegime",
    "BoundaryWarning",
    "CensoredError",
    "ConfigError",
    "DegenerateError",
    "DomainError",
    "NetworkConfig",
    "Pmf",
    "ResourceError",
    "SimConfig",
    "SimReport",
    "WalkState",
    "coefficients",
    "enumeration_oracle",
    "expected_rounds_to_level",
    "gaussian_tail_bound",
    "mean_series",
    "mean_var_y",
    "normal_approx_y",
    "normality_diagnostics",
    "pull_distribution",
    "round_chain_distribution",
    "round_count_distribution",
    "run_monte_carlo",
    "sample_step",
    "second_moment_series",
    "simulate_round_chain",
    "step_pmf",
    "stirling_oracle",
    "validate_config",
    "walk_distribution",
    "y_distribution",
]
