"""Exception hierarchy shared across the toolkit.

Two broad families matter for the CLI exit-code mapping:

* ParseError   -> malformed input files / bad CLI or config values (exit 2)
* DomainError  -> structurally valid input that violates a domain rule (exit 3)

Everything else that escapes is an internal error (exit 1).
"""


class RigkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(RigkitError):
    """Input could not be parsed: bad syntax, bad schema, bad value format."""


class DomainError(RigkitError):
    """Input parsed fine but violates a domain invariant."""


# --- transformation tree ---

class SelfLoopError(DomainError):
    pass


class DuplicateEdgeError(DomainError):
    """Adding this edge would connect two frames that are already connected."""


class UnknownFrameError(DomainError):
    pass


class DisconnectedError(DomainError):
    """No path exists between the two requested frames."""


# --- clock synchronization ---

class InsufficientDataError(DomainError):
    pass


class DegenerateSpanError(DomainError):
    """Correspondence timestamps span too small an interval to fit a model."""


class SkewOutOfRangeError(DomainError):
    """Fitted skew is outside the plausible range for real oscillators."""


class StreamMismatchError(DomainError):
    pass


# --- IMU noise characterization ---

class EmptyStreamError(DomainError):
    pass


class TooShortError(DomainError):
    """Not enough samples for the requested averaging times."""


class NoWhiteNoiseRegionError(DomainError):
    pass


class NoRandomWalkRegionError(DomainError):
    pass


# --- camera / colorization ---

class MissingModelError(DomainError):
    pass


class BadSpecError(ParseError):
    pass


class NoConvergenceError(DomainError):
    """Iterative undistortion failed to converge."""


class NoValidProjectionsError(DomainError):
    pass


class DimensionMismatchError(DomainError):
    pass


# --- trajectory evaluation ---

class NonMonotonicError(DomainError):
    pass


class NoMatchesError(DomainError):
    """Temporal association produced no pairs within the tolerance."""


class EmptySequenceError(DomainError):
    pass


# --- dataset container ---

class MissingManifestError(ParseError):
    pass


class SchemaError(ParseError):
    pass


class UnknownStreamError(DomainError):
    pass


class CorruptRecordError(ParseError):
    pass
