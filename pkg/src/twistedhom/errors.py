"""Exception types shared across the package."""


class TwistedHomError(Exception):
    """Base class for all package errors."""


class DomainError(TwistedHomError, ValueError):
    """Argument outside the domain an operation supports."""


class EvaluationError(TwistedHomError, ArithmeticError):
    """An integrand or field produced a non-finite value."""


class WindowError(TwistedHomError, ValueError):
    """Normalization window too small to hold the beam's main lobe."""


class UnsupportedConfigurationError(TwistedHomError, ValueError):
    """Configuration has no closed form; use the numeric path instead."""


class ContractError(TwistedHomError, ValueError):
    """Inputs violate a cross-argument contract (e.g. mismatched grids)."""


class ConfigError(TwistedHomError, ValueError):
    """Invalid simulation configuration.

    Parameters
    ----------
    path : str
        Dotted path of the offending key, e.g. ``"envelope.theta_c"``.
    message : str
        What is wrong with it.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class FormatError(TwistedHomError, ValueError):
    """Malformed input file (bad PGM header, truncated data, ...)."""
