"""Exception types shared across the library."""


class MagweightError(Exception):
    """Base class for all magweight errors."""


class InvalidInput(MagweightError):
    """Malformed or out-of-contract input (non-finite data, bad flags, ...)."""


class DegenerateInput(MagweightError):
    """Input that makes the similarity matrix singular, e.g. duplicate points."""


class IllConditioned(MagweightError):
    """Positive-definiteness lost at working precision.

    ``pivot`` is the 0-based index of the factorization step that failed,
    when known.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot
