"""Exception hierarchy shared by all kgnu modules."""


class KGNUError(Exception):
    """Base class for every error raised by kgnu."""


class PoleAtX(KGNUError, ValueError):
    """A deformed hyperbolic denominator vanishes at the requested point."""

    def __init__(self, x0, message=None):
        self.x0 = x0
        super().__init__(message or f"pole of the deformed function at x0 = {x0!r}")


class DomainViolation(KGNUError, ValueError):
    pass


class NoRealKappa(KGNUError, ArithmeticError):
    pass


class DegenerateSigma(KGNUError, ArithmeticError):
    pass


class NotPerfectSquare(KGNUError, ArithmeticError):
    pass


class NoAdmissibleBranch(KGNUError, ArithmeticError):
    pass


class UnsupportedSigmaClass(KGNUError, ValueError):
    pass


class DiscriminantNegative(KGNUError, ArithmeticError):
    pass


class DegenerateLevel(KGNUError, ArithmeticError):
    pass


class NotPhysical(KGNUError, ValueError):
    pass


class InvalidVariantParams(KGNUError, ValueError):
    pass


class NoRoot(KGNUError, ArithmeticError):
    pass
