"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigurationError -> 2,
NumericError (and subclasses) -> 3, partial results -> 4.
"""


class DiffTestError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DiffTestError):
    """Invalid user input: unknown model name, bad config file, bound violation."""


class NumericError(DiffTestError):
    """Numeric failure during computation."""


class NumericDomainError(NumericError):
    """A quantity left its mathematical domain (e.g. Sigma not positive definite)."""


class SimulationBlowupError(NumericError):
    """The simulated state became non-finite or exceeded the blowup guard."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"simulation blew up at internal step {step}")
