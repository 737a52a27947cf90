"""Exception types raised by bandforge."""


class BandforgeError(Exception):
    """Base class for all bandforge errors."""


class InvalidModelError(BandforgeError, ValueError):
    """A coefficient model violates b_n > 0 or produces a non-finite value."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotConvergedError(BandforgeError):
    """Recursion coefficients did not settle to a periodic limit."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class UnsupportedPeriodError(BandforgeError, ValueError):
    """Only periods K = 1, 2, 3 have closed-form terminators."""


class MergedBandsError(BandforgeError):
    """Fewer than 2K distinct band edges: at least one gap has closed."""

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = tuple(roots)


class PivotBreakdownError(BandforgeError, ZeroDivisionError):
    """A continued-fraction denominator vanished on the real axis (a pole was hit)."""


class SecondKindPoleError(BandforgeError, ZeroDivisionError):
    """The second-kind density denominator vanished."""


class NegativeDensityError(BandforgeError):
    """A density or spectral weight came out negative beyond roundoff."""
