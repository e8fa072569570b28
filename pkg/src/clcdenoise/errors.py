"""Exception hierarchy shared across the package.

Shape/contract violations raise plain ValueError; these classes cover
conditions a caller may sensibly catch and map to exit codes.
"""


class ClcError(Exception):
    """Base class for package-specific errors."""


class ConfigError(ClcError):
    """Invalid configuration, e.g. a sample-rate mismatch or a bad STFT geometry."""


class DataError(ClcError):
    """Input data is unusable: non-finite samples, silent speech, zero reference."""


class FormatError(ClcError):
    """A file (WAV or weight file) does not conform to its declared format."""
