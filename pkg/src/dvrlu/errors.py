"""Exception taxonomy for precision-tracked DVR computations.

Everything raised on purpose by this package derives from :class:`DvrError`,
so callers can distinguish "the input was too imprecise for this question"
from genuine bugs.
"""

from __future__ import annotations


class DvrError(Exception):
    """Base class for all errors raised by this package."""


class AmbiguousValuation(DvrError):
    """A pivoting decision needed a valuation the precision cannot resolve.

    Raised when comparing two element valuations where at least one element is
    indistinguishable from zero and the known precision bounds do not force
    the outcome of the comparison.
    """


class DivisionByUnknownZero(DvrError):
    """Division by an element indistinguishable from zero."""


class DegenerateInput(DvrError):
    """The matrix is (or appears, at this precision, to be) singular.

    The elimination reached a state where a required pivot is
    indistinguishable from zero, so the requested factorization does not
    exist or cannot be certified at the working precision.
    """


class DegenerateDecomposition(DvrError):
    """A split factorization is too degenerate for the requested conversion.

    Raised when a diagonal entry of L' or V' is indistinguishable from zero,
    so the quotients / precision bookkeeping of the conversion are undefined.
    """


class InsufficientLift(DvrError):
    """The lift-and-recompute strategy needs more precision than supplied.

    Attributes:
        required_prec: absolute precision at which a retry is guaranteed (or,
            when a pivot valuation was undeterminable, a suggested next try).
    """

    def __init__(self, message: str, required_prec: int):
        super().__init__(message)
        self.required_prec = required_prec


class ExhaustedRetries(DvrError):
    """A randomized procedure failed every attempt it was allowed.

    Attributes:
        tries: number of attempts made.
        last_failure: description of the final attempt's failure, if any.
    """

    def __init__(self, message: str, tries: int, last_failure: object = None):
        super().__init__(message)
        self.tries = tries
        self.last_failure = last_failure


class NotSorted(DvrError):
    """An exponent sequence that must be non-decreasing is not."""


class CoincidentPoints(DvrError):
    """Two interpolation points are congruent at working precision."""
