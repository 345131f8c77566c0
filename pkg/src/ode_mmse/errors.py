"""Exception hierarchy. ``category`` is the machine-readable tag the CLI reports."""


class OdeMmseError(Exception):
    category = "error"
    exit_code = 1


class ConfigError(OdeMmseError, ValueError):
    category = "config"
    exit_code = 2


class DimensionError(ConfigError):
    category = "dimension"


class NumericalError(OdeMmseError, ArithmeticError):
    category = "numerical"
    exit_code = 3


class DecompositionError(NumericalError):
    category = "decomposition"


class EulerStabilityError(NumericalError):
    category = "euler-instability"


class QuadratureError(NumericalError):
    category = "quadrature"
