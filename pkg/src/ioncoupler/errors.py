"""Exception taxonomy.

ConfigError and ParameterError signal bad user input (CLI exit code 2);
EngineError and its subclasses signal runtime failures inside the physics
or fitting layers (CLI exit code 3).
"""


class IonCouplerError(Exception):
    """Base class for all package errors."""


class ParameterError(IonCouplerError, ValueError):
    """A physical parameter is out of its validity domain."""


class DomainError(ParameterError):
    """An operation was asked for outside the regime where it is defined."""


class ConfigError(IonCouplerError):
    """Malformed or inconsistent run configuration."""


class EngineError(IonCouplerError):
    """Failure inside the simulation or inference engine."""


class LeakageError(EngineError):
    """Population leaked into the top Fock level of a truncated mode."""


class ConsistencyError(EngineError):
    """An internal invariant was violated (non-hermitian assembly, ...)."""


class ClosureError(EngineError):
    """A phase-space loop was evaluated away from its closure time."""


class FitError(EngineError):
    """A least-squares or peak fit could not be carried out."""


class LambDickeWarning(UserWarning):
    """Drive parameters strain the linearized spin-motion coupling."""
