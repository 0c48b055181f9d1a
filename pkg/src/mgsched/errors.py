"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameters or configuration (violated model assumptions, bad flags)."""


class DataError(ValueError):
    """Malformed input data (negative demand, bad CSV rows, uneven spacing)."""


class UnsupportedSettingError(ConfigError):
    """An operation was asked to handle a setting it does not cover."""


class ValidationError(ValueError):
    """A schedule or trace failed a feasibility check.

    ``violations`` holds the offending items so callers can report them.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)
