"""Exception types shared across the package."""


class VicsekError(Exception):
    """Base class for all package-specific errors."""


class LevelTooLargeError(VicsekError, ValueError):
    """Requested level exceeds the configured maximum."""


class LevelMismatchError(VicsekError, ValueError):
    """Coarse/fine level arguments are inconsistent."""


class InvalidVertexError(VicsekError, KeyError):
    """Vertex id outside the graph's id space."""


class GraphMismatchError(VicsekError, ValueError):
    """Function or decomposition tied to a different graph."""


class SizeCapError(VicsekError, ValueError):
    """Problem size exceeds the dense-solver cap."""


class SolverError(VicsekError, RuntimeError):
    """Eigensolver failed to converge or residuals exceed tolerance."""


class WindowError(VicsekError, ValueError):
    """Time grid leaves the spectral validity window (or too few samples remain)."""


class InsufficientSamplesError(VicsekError, ValueError):
    """Not enough admissible samples for a regression."""


class SchemaError(VicsekError, ValueError):
    """Serialized document has an unknown version or malformed layout."""


class ConfigError(VicsekError, ValueError):
    """Run configuration could not be parsed or is invalid."""
