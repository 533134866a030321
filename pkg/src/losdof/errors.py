"""Exception types shared across the package."""


class LosDofError(Exception):
    """Base class for all losdof errors."""


class InvalidParameterError(LosDofError, ValueError):
    """A scenario or operation parameter violates its documented domain."""


class MatrixKindError(LosDofError, ValueError):
    """An operation received a matrix whose provenance tag it cannot accept."""


class EigensolverError(LosDofError, RuntimeError):
    """The dense eigensolver failed to converge; never silently truncated."""


class InconsistentSpectrumError(LosDofError, ValueError):
    """A Gram spectrum violates positive semidefiniteness beyond tolerance."""


class DiscretizationTooCoarseError(LosDofError, RuntimeError):
    """Quadrature eigenvalues escaped [0, 1] by more than the allowed slack."""


class DecayViolationError(LosDofError, RuntimeError):
    """The spectral tail does not exhibit a certifiable exponential decay."""


class ConfigError(LosDofError, ValueError):
    """A run configuration is malformed; message carries key/line context."""
