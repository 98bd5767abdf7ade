"""Exception hierarchy shared by the library and the command line."""


class HybridSimError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HybridSimError, ValueError):
    """Invalid grid, parameter regime or run configuration.

    ``key`` names the offending configuration entry when there is one.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class NumericalDomainError(HybridSimError, ArithmeticError):
    """Non-finite field values or derivatives."""


class StaleStateError(HybridSimError):
    """Expectation requested on a state that is no longer normalized."""


class DiagnosticError(HybridSimError):
    """A diagnostic cannot be computed from the data supplied."""
