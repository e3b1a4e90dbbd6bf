"""Exception types raised across the toolkit."""


class BssError(ValueError):
    """Base class for all toolkit errors."""


class WavFormatError(BssError):
    """WAV file is malformed or not mono 16-bit PCM."""


class UnsupportedRateError(BssError):
    """Sample rate cannot be handled (not 8 kHz or an integer multiple)."""


class DimensionError(BssError):
    """Sequence lengths or array shapes do not match the operation."""


class ParameterError(BssError):
    """An option or parameter is out of its valid range."""


class DegenerateInputError(BssError):
    """Input carries no usable statistics (zero variance, silent frames)."""


class SelectionError(BssError):
    """No tree node produced a finite score on both channels."""


class SingularDataError(BssError):
    """Two-channel data has a rank-deficient covariance."""
