"""Exception hierarchy shared by every sr_forge module.

The CLI maps these onto exit codes, so each failure family gets its own
class instead of a bare ``ValueError``.
"""


class SrForgeError(Exception):
    """Base class for all sr_forge errors."""


class DataError(SrForgeError, ValueError):
    """Bad data or arguments: shapes, ranges, parameters."""


class ChannelMismatchError(DataError):
    pass


class DimensionMismatchError(DataError):
    pass


class ShapeMismatchError(DataError):
    pass


class InvalidParameterError(DataError):
    pass


class StaleCacheError(SrForgeError, RuntimeError):
    """Backward pass requested without a matching forward pass."""


class FormatError(SrForgeError):
    """A file exists but its contents cannot be decoded."""


class UnsupportedFormatError(FormatError):
    pass


class CorruptFileError(FormatError):
    pass


class BadMagicError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class TruncatedFileError(FormatError):
    pass


class ShapeInconsistencyError(FormatError):
    pass


class ImageNotFoundError(SrForgeError, FileNotFoundError):
    pass


class IOFailure(SrForgeError, OSError):
    """Reading or writing failed at the OS level."""
