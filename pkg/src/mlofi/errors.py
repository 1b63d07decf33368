"""Exception taxonomy shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericalError -> 3.
"""


class ToolkitError(Exception):
    """Base class for all toolkit failures."""


class ConfigError(ToolkitError):
    """Invalid run configuration."""


class IndivisibleGrid(ConfigError):
    """Session length, window length and sub-window length do not nest."""


class DataError(ToolkitError):
    """Input data violates the format or book-consistency contract."""


class MalformedRow(DataError):
    """Fatal parse failure; reports the first offending line."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class EmptySession(DataError):
    """No events inside the configured session window."""


class InconsistentEvent(DataError):
    """An event contradicts the current book state (corrupted input)."""

    def __init__(self, event_index: int, reason: str):
        super().__init__(f"event {event_index}: {reason}")
        self.event_index = event_index
        self.reason = reason


class OneSidedBook(DataError):
    """Mid-price undefined: one or both sides of the book are empty."""


class TooFewRows(DataError):
    """A regression window retains fewer usable rows than required."""


class NumericalError(ToolkitError):
    """Numerical linear algebra failed or produced garbage."""


class RankDeficient(NumericalError):
    """Design matrix is numerically rank deficient."""


class NumericalFailure(NumericalError):
    """A matrix solve returned non-finite values."""


class DegenerateColumn(NumericalError):
    """A feature column has zero variance; its correlations are undefined."""
