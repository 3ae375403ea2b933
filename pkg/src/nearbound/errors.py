"""Exception types shared across the package."""


class NearboundError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(NearboundError, ValueError):
    """State vector length does not match the expected dimension."""


class ActionError(NearboundError, ValueError):
    """Action id is out of range for the pool or environment."""


class EmptyPoolError(NearboundError, ValueError):
    """An operation that needs at least one experience got an empty pool."""


class ContractError(NearboundError):
    """A caller violated a documented precondition."""


class UnsupportedDimensionError(NearboundError, ValueError):
    """Operation only implemented for a specific state dimension."""


class SizeError(NearboundError, ValueError):
    """Input exceeds the size cap of a combinatorial routine."""


class TrainingError(NearboundError, RuntimeError):
    """Teacher training diverged or produced non-finite values."""


class ExternalTeacherError(NearboundError, RuntimeError):
    """External teacher process violated the line protocol or died."""


class LengthError(NearboundError, ValueError):
    """Paired sequences have different lengths."""


class EmptyError(NearboundError, ValueError):
    """A nonempty sequence was required."""


class PoolFormatError(NearboundError, ValueError):
    """A pool/model/result file is malformed or violates its header bounds."""
