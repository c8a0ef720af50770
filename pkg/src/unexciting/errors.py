"""Exception hierarchy.

Input problems derive from ``ValueError``; numerical failures (tolerance
breaches, non-finite values) derive from ``ArithmeticError``.  The CLI maps
the two families to exit codes 2 and 3.
"""


class InputError(ValueError):
    """Malformed or physically inadmissible input."""


class NumericalError(ArithmeticError):
    """A computation failed a numerical self-check."""


class WronskianError(NumericalError):
    pass


class NormalizationError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass
