"""Exception and warning types raised across the package."""


class PushWalkError(Exception):
    """Base class for all errors raised by pushwalk."""


class ConfigError(PushWalkError, ValueError):
    """A network or simulation configuration violates its invariants."""


class DomainError(PushWalkError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ResourceError(PushWalkError, RuntimeError):
    """A computation would exceed its configured size guard."""


class DegenerateError(PushWalkError, ArithmeticError):
    """A recursion hit a state from which it cannot make progress."""


class CensoredError(PushWalkError):
    """A replication stopped at ``max_rounds`` before every level was reached.

    Simulations record censoring in their results instead of raising it; the
    class exists so that callers can ``raise`` it when they require complete
    samples (see :meth:`pushwalk.sim.SimReport.require_uncensored`).
    """


class BoundaryWarning(UserWarning):
    """A level coincides with a fluid round level, where no weak limit is known."""
