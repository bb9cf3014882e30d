"""Exception types raised across the package."""


class FormatError(ValueError):
    """Malformed input file (PGM, FSM matrix, config)."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to converge or hit an undefined quantity."""


class UndefinedMetricError(ValueError):
    """A metric is undefined for the given input (e.g. single-class AUC)."""
