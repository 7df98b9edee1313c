"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BudgetError(RuntimeError):
    """The environment's round budget has been exhausted."""


class StateError(RuntimeError):
    """An object was used in a state that does not permit the call."""


class ConfigError(ValueError):
    """An experiment configuration is invalid.

    ``path`` names the offending field, e.g. ``policy.G``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
