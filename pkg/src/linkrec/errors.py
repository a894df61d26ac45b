"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: usage/config problems exit 1, data
problems exit 2, numerical failures exit 3.
"""


class LinkrecError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(LinkrecError):
    """Invalid configuration value or invalid command usage."""


class DataError(LinkrecError):
    """Unusable input data: unreadable files, empty datasets, bad formats."""


class EmptyDatasetError(DataError):
    """Filtering or mapping removed every session."""


class FormatError(DataError):
    """A binary or text artifact does not match its declared layout."""


class NumericalError(LinkrecError):
    """A linear solve failed; carries condition diagnostics in the message."""
