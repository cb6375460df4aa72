"""Exception types shared across the package."""


class ActinMachineError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ActinMachineError):
    """Array or slice dimensions do not agree."""


class EmptyInputError(ActinMachineError):
    """An operation received an empty collection it cannot work with."""


class FormatError(ActinMachineError):
    """A file does not conform to its expected on-disk format.

    ``offset`` is the byte offset at which the problem was detected,
    when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class GenerationError(ActinMachineError):
    """Synthetic network generation cannot proceed."""


class CoordinateError(ActinMachineError):
    """A voxel coordinate lies outside the grid."""


class DomainError(ActinMachineError):
    """A query was made outside the domain of a derived function."""
