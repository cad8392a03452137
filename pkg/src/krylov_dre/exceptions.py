"""Exception hierarchy for the solver stack."""


class KrylovDREError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(KrylovDREError, ValueError):
    pass


class NumericOverflowError(KrylovDREError, ArithmeticError):
    """Raised when squaring in the matrix exponential overflows."""

    def __init__(self, msg, norm_1=None, scaling=None):
        super().__init__(msg)
        self.norm_1 = norm_1
        self.scaling = scaling


class SingularShiftError(KrylovDREError, ArithmeticError):
    def __init__(self, shift):
        super().__init__(f"shifted matrix (s*I - A) is singular for s = {shift!r}")
        self.shift = shift


class NotPositiveDefiniteError(KrylovDREError, ValueError):
    pass


class MatrixMarketError(KrylovDREError, ValueError):
    """Malformed Matrix Market content; ``line`` is 1-based when known."""

    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line


class UnsupportedFormatError(MatrixMarketError):
    pass


class EmptyBasisError(KrylovDREError, ValueError):
    pass


class SubstepBreakdownError(KrylovDREError, ArithmeticError):
    """U became numerically singular inside a Davison-Maki substep."""

    def __init__(self, msg, rcond=None, substep=None):
        super().__init__(msg)
        self.rcond = rcond
        self.substep = substep


class ProjectionError(KrylovDREError, ValueError):
    pass


class UnsupportedEstimateError(KrylovDREError, ValueError):
    pass


class ToleranceNotMetError(KrylovDREError):
    """Adaptive growth hit ``k_max``; the best outcome is kept in ``outcome``."""

    def __init__(self, msg, outcome=None):
        super().__init__(msg)
        self.outcome = outcome


class InstabilityError(KrylovDREError, ArithmeticError):
    pass


class OracleSizeError(KrylovDREError, ValueError):
    pass
