"""Exception types raised across the toolkit."""


class TadError(Exception):
    """Base class for all toolkit errors."""


class ParseError(TadError):
    """A stream line is not valid JSON."""

    def __init__(self, line_no: int, reason: str = "malformed JSON"):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class SchemaError(TadError):
    """A record is missing or violates a required field."""

    def __init__(self, field: str, reason: str = "missing or invalid"):
        super().__init__(f"field {field!r}: {reason}")
        self.field = field
        self.reason = reason


class VersionError(TadError):
    """Filter config version is not newer than the stored one."""


class DimError(TadError):
    """Vector dimension does not match the model or descriptor."""


class EmptyDayError(TadError):
    """Relevance overlap requested for a day with no vectors."""


class InsufficientSamples(TadError):
    """Fewer samples than requested clusters."""


class CurveTooShort(TadError):
    """Elbow selection needs at least two sweep points."""


class EmptyWindow(TadError):
    """Metric requested for a window with no filtered records."""


class RemoteError(TadError):
    """Remote embedding endpoint failed after retries."""


class ProtocolError(TadError):
    """Remote embedding endpoint violated the wire contract."""


class LineageError(TadError):
    """Embedder warm-start lineage revisits an ancestor."""


class StoreError(TadError):
    """A referenced record or window is absent from the store."""


class StoreLockedError(TadError):
    """Another process holds the store lock."""


class LabelError(TadError):
    """An annotation row carries an unknown label."""

    def __init__(self, row: int, value: str):
        super().__init__(f"row {row}: unknown label {value!r}")
        self.row = row
        self.value = value


class ConflictError(TadError):
    """Two annotations share (record, annotator, timestamp) but disagree."""


class MissingClassError(TadError):
    """A training pool lacks one of the classes."""
