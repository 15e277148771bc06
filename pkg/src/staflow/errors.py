"""Exception types shared across the toolkit."""


class StaflowError(Exception):
    """Base class for every error this package raises on bad data or usage."""


class UnsupportedFormat(StaflowError):
    """File is not in a format this toolkit accepts (e.g. non-P5 image)."""


class Malformed(StaflowError):
    """File content violates its declared format."""


class TooSmall(StaflowError):
    """Image is too small for the requested operation."""


class InvalidScale(StaflowError):
    """Pyramid scale factor outside the open interval (0, 1)."""


class DimensionMismatch(StaflowError):
    """Operands cover different pixel rasters."""


class ZeroVector(StaflowError):
    """Orientation of a (near-)zero vector is undefined."""


class BoxTooSmall(StaflowError):
    """Clamped bounding box cannot hold the descriptor grid."""


class LengthMismatch(StaflowError):
    pass


class OutOfRange(StaflowError):
    pass


class WeightMismatch(StaflowError):
    pass


class Empty(StaflowError):
    pass


class MissingPath(StaflowError):
    pass


class SinglePerson(StaflowError):
    pass


class SingleClass(StaflowError):
    pass


class NoUsableFrames(StaflowError):
    """A sequence had no frame pair with a usable bounding box."""


class EmptyGrid(StaflowError):
    pass


class InconsistentDimensions(StaflowError):
    pass
