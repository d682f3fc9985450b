"""Exception types shared across the toolkit."""


class TwoLevelError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(TwoLevelError):
    """A column or feature referenced by name does not exist or is malformed."""


class ParseError(TwoLevelError):
    """A data file could not be parsed; message carries the offending row."""


class EmptyDatasetError(TwoLevelError):
    """A dataset with zero instances was supplied where rows are required."""


class MissingValueError(TwoLevelError):
    """Rows contain empty cells; carries the 1-based row numbers."""

    def __init__(self, rows):
        self.rows = list(rows)
        super().__init__(f"missing values in rows {self.rows}")


class UnsatisfiableConjunctionError(TwoLevelError, ValueError):
    """The predicate set contains a contradiction (e.g. x>=t and x<t)."""


class EmptyCandidatesError(TwoLevelError):
    """No conjunction survives the support threshold; lower min_support."""


class OracleUnavailableError(TwoLevelError):
    """The external labeler timed out or could not be reached."""


class ProtocolError(TwoLevelError):
    """The external labeler returned a malformed payload; quotes it."""


class LabelError(TwoLevelError):
    """The external labeler returned a label of an unsupported type."""


class SearchSpaceError(TwoLevelError):
    """Exhaustive enumeration was refused because the space is too large."""
