"""Exception hierarchy shared by every oagrade module."""


class OagradeError(Exception):
    """Base class for all errors raised by this package."""


class DataError(OagradeError, ValueError):
    """Input data or file content is invalid."""


class ImageFormatError(DataError):
    """Unknown or malformed Netpbm header."""


class UnsupportedImageError(DataError):
    """Well-formed Netpbm file using a feature we do not read (e.g. maxval != 255)."""


class CorruptImageError(DataError):
    """Pixel payload is truncated or out of range."""


class EmptyInputError(DataError):
    pass


class ShapeError(DataError):
    pass


class ParameterError(OagradeError, ValueError):
    pass


class ManifestError(DataError):
    pass


class BundleError(DataError):
    pass


class UnsupportedVersionError(BundleError):
    pass


class NumericError(OagradeError, ArithmeticError):
    """A non-finite value appeared during training."""

    def __init__(self, message, epoch=None):
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)
        self.epoch = epoch
