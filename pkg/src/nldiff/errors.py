"""Exception types shared across the package.

Every error raised on a user-facing path derives from NldiffError so the
command line can map failures to exit codes without pattern matching on
library internals.
"""


class NldiffError(Exception):
    """Base class for all package errors."""


class ConfigError(NldiffError):
    """Malformed, incomplete, or inconsistent experiment configuration."""


class UnderresolvedKernel(NldiffError):
    """Grid spacing too coarse for the kernel support (needs >= 16 points per radius)."""


class GridMismatch(NldiffError):
    """Two fields or a field and an operator live on different grids."""


class OutOfDomain(NldiffError):
    """Interpolation query outside [-half_length, half_length)."""


class DomainTooSmall(NldiffError):
    """Rescaling would read the fine field outside its domain."""


class CorruptSnapshot(NldiffError):
    """Snapshot file failed magic, version, or length validation."""


class NonfiniteState(NldiffError):
    """A solver state stopped being finite; reports the time it happened."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class EmptyExclusionRegion(NldiffError):
    """Barrier exclusion radius exceeds the grid half-length."""


class WindowExceedsDomain(NldiffError):
    """Convergence window R*sqrt(t) does not fit inside half of the domain."""


class InsufficientPoints(NldiffError):
    """Not enough samples inside a fit window (needs >= 5)."""


class NonpositiveValue(NldiffError):
    """Log-log fit received a non-positive value."""


class InvalidAlpha(NldiffError):
    """Power-law exponent outside the admissible range for the family."""


class SubcriticalExponent(NldiffError):
    """Absorption exponent too small for the family: F(k) would diverge."""


class SingularDatumUnsupported(NldiffError):
    """Requested singular datum cannot be cell-averaged on this grid."""
