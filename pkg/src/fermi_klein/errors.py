"""Exception types raised by the package."""


class FermiKleinError(Exception):
    """Base class for all package errors."""


class ShapeError(FermiKleinError, ValueError):
    pass


class MembershipError(FermiKleinError, ValueError):
    """An operand is not in the algebra within tolerance."""


class NotUnitalError(FermiKleinError, ValueError):
    pass


class GradingError(FermiKleinError, ValueError):
    """The grading cannot be used as requested (e.g. not implementable)."""


class GradingNotInner(GradingError):
    """The grading is not implemented by a self-adjoint unitary of the algebra."""


class StateInvalid(FermiKleinError, ValueError):
    pass


class NotEven(StateInvalid):
    pass


class InvalidPermutation(FermiKleinError, ValueError):
    pass


class RankDeficient(FermiKleinError, ArithmeticError):
    pass


class ClosureError(FermiKleinError, RuntimeError):
    """Closure iteration exceeded its round cap."""


class InputError(FermiKleinError, ValueError):
    """A JSON input file is malformed."""
