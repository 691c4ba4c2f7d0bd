"""Exception types shared across the package."""


class Instanton1DError(Exception):
    """Base class for all errors raised by this package."""


class NotMultiWellError(Instanton1DError):
    """Fewer than two potential minima were found."""


class NotSameLevelError(Instanton1DError):
    """Well bottoms differ by more than the level tolerance."""


class WindowError(Instanton1DError):
    """A time window is unsuitable (not asymptotic, or too large to resolve)."""


class NegativeModeError(Instanton1DError):
    """The fluctuation operator has a negative eigenvalue (not a 1-instanton)."""


class GridTooNarrowError(Instanton1DError):
    """Eigenfunctions do not decay below tolerance at the grid edges."""


class GridTooCoarseError(Instanton1DError):
    """Richardson comparison indicates unresolved discretization error."""


class ResolventPoleError(Instanton1DError):
    """Resolvent evaluated at (or numerically on top of) a pole."""


class AmplitudeError(Instanton1DError):
    """Asymptotic amplitude extraction failed or is internally inconsistent."""


class ConfigError(Instanton1DError):
    """Malformed or inconsistent analysis configuration."""
