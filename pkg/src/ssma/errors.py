"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SSMAError(Exception):
    exit_code = 1


class ParameterError(SSMAError, ValueError):
    """Invalid argument value (bad k, u, fraction, ...)."""

    exit_code = 2


class ConfigError(SSMAError, ValueError):
    exit_code = 2


class DataError(SSMAError, ValueError):
    """Malformed or inconsistent data (files, labels, shapes)."""

    exit_code = 3


class NumericalError(SSMAError, ArithmeticError):
    exit_code = 4


class SingularPencilError(NumericalError):
    """The right-hand matrix stayed indefinite across the whole ridge ladder."""

    def __init__(self, message, ladder):
        super().__init__(message)
        self.ladder = tuple(float(e) for e in ladder)
