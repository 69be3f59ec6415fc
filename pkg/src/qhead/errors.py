"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A parameter, index, or shape is outside the supported range."""


class DegenerateInputError(ValueError):
    """An input vector is too close to zero to be normalized safely."""


class DataFormatError(ValueError):
    """A dataset or checkpoint file does not match its on-disk layout."""


class DataError(ValueError):
    """File contents are structurally valid but semantically wrong."""


class UnsupportedModeError(RuntimeError):
    """The requested evaluation mode is not available for this operation."""
