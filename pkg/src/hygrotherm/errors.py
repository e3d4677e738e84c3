"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a constitutive or fire function."""


class ConfigError(ValueError):
    """A configuration file or object failed validation."""


class SolverError(RuntimeError):
    """The time stepper hit a non-recoverable numerical condition."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
