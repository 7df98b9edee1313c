"""Stochastic linear bandits on the unit ball with a hint action."""

__version__ = "0.1.0"

from .environment import BanditInstance, Environment, RegretLedger, instantaneous_regret  # noqa: E402
from .errors import BudgetError, ConfigError, DomainError, StateError  # noqa: E402
from .rng import RandomSource  # noqa: E402

__all__ = [
    "BanditInstance",
    "BudgetError",
    "ConfigError",
    "DomainError",
    "Environment",
    "RandomSource",
    "RegretLedger",
    "StateError",
    "__version__",
    "instantaneous_regret",
]
