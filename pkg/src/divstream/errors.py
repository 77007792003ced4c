"""Exception types shared across the package.

Two broad families matter to callers: configuration problems (bad
parameters, impossible requests) and data problems (malformed or
truncated inputs). The CLI maps the former to exit code 2 and the
latter to exit code 3.
"""


class DivstreamError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DivstreamError):
    """A parameter value is out of range or inconsistent."""


class DimensionMismatch(DivstreamError):
    """A vector's length does not match the established stream dimension."""


class NonFiniteValue(DivstreamError):
    """A feature vector contains NaN or infinity."""


class StreamOrderError(DivstreamError):
    """Frame indices did not arrive as a gapless 0-based sequence."""


class NotInitialized(DivstreamError):
    """An operation needs state that has not been built yet."""


class InsufficientFrames(DivstreamError):
    """Fewer frames were observed than exemplar slots requested."""


class DegenerateData(DivstreamError):
    """All points coincide; no principal directions exist."""


class UnsupportedDimension(DivstreamError):
    """Exact hull volume is only implemented for 2-d and 3-d point sets."""


class SlotOutOfRange(DivstreamError):
    """An exemplar slot index is outside [0, K)."""


class TooFewPoints(DivstreamError):
    """A batch selector was asked for more exemplars than points given."""


class TailTooLong(DivstreamError):
    """A frozen tail longer than the stream itself was requested."""


class EmptyReferenceSet(DivstreamError):
    """A reference summary with no frames cannot be matched against."""


class IndexOutOfRange(DivstreamError):
    """An exemplar index does not resolve against the labelled stream."""


class BadMagic(DivstreamError):
    """A binary feature file does not start with the expected magic."""


class TruncatedPayload(DivstreamError):
    """A binary feature file ended mid-record or short of its count."""


class CsvParse(DivstreamError):
    """A CSV cell could not be parsed as a float.

    Carries 0-based ``row`` and ``col`` of the offending cell.
    """

    def __init__(self, row: int, col: int, message: str = ""):
        self.row = row
        self.col = col
        detail = message or "cannot parse value"
        super().__init__(f"row {row}, column {col}: {detail}")


CONFIG_FAMILY = (
    ConfigError,
    UnsupportedDimension,
    SlotOutOfRange,
    TooFewPoints,
    TailTooLong,
    NotInitialized,
    EmptyReferenceSet,
)


def error_kind(exc: BaseException) -> str:
    """Classify an error as "config" (exit 2) or "io" (exit 3)."""
    return "config" if isinstance(exc, CONFIG_FAMILY) else "io"
