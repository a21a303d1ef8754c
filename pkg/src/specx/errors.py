"""Exception hierarchy shared by all modules."""


class SpecxError(Exception):
    """Base class for library errors."""


class DimensionMismatch(SpecxError, ValueError):
    pass


class NonSymmetricInput(SpecxError, ValueError):
    pass


class NoConvergence(SpecxError, RuntimeError):
    pass


class NonHermitianOperator(SpecxError, ValueError):
    pass


class NonHermitianSymbol(SpecxError, ValueError):
    pass


class EmptyOperand(SpecxError, ValueError):
    pass


class MixedPeriods(SpecxError, ValueError):
    pass


class ClassUnsupported(SpecxError, ValueError):
    pass


class NotConverged(SpecxError, RuntimeError):
    """A direction does not select a single localization."""

    def __init__(self, direction, residual, message=None):
        self.direction = direction
        self.residual = residual
        super().__init__(message or f"no limit along {direction}: residual {residual:.3g}")


class InvalidSpec(SpecxError, ValueError):
    pass


class InfeasibleSize(SpecxError, ValueError):
    pass


class UnsupportedLattice(SpecxError, ValueError):
    pass


class ConfigError(SpecxError, ValueError):
    """Base for configuration problems (CLI exit code 4)."""


class ParseError(ConfigError):
    def __init__(self, location, message):
        self.location = location
        super().__init__(f"{location}: {message}")


class UnknownId(ConfigError):
    pass


class ConstraintViolation(ConfigError):
    pass
