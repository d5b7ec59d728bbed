"""Exception types shared across the package."""


class StreamPeriodError(Exception):
    """Base class for every error raised by this package."""


class AdjacencyError(StreamPeriodError):
    """Fingerprint ranges do not line up for the requested composition."""


class IncompatibleSketchError(StreamPeriodError):
    """Two sketches cannot be compared (length, context, budget or backend differ)."""


class StreamOrderError(StreamPeriodError):
    """Bytes were fed out of stream order."""


class RangeError(StreamPeriodError):
    """An index lies outside the permitted range."""


class DegenerateInputError(StreamPeriodError):
    """Input too short for the requested operation."""


class StreamMutationError(StreamPeriodError):
    """Second-pass stream content differs from the first pass."""


class LengthMismatchError(StreamPeriodError):
    """Declared stream length does not match the number of bytes fed."""


class GenerationError(StreamPeriodError):
    """A corpus generator received an infeasible request."""


class PreconditionError(StreamPeriodError):
    """A validator precondition failed; carries the failing witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
