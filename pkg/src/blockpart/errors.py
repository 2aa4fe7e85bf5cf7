"""Exception types shared across the package."""


class DataFormatError(ValueError):
    """Raised when an input file or stream violates the expected format."""


class OptimizationError(RuntimeError):
    """Raised when a search or fit cannot produce a usable result."""
