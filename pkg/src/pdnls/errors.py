"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A problem parameter violates a standing assumption (e.g. ``p > 2``)."""


class ExtrapolationError(ValueError):
    """Evaluation requested outside the sampled range of a table or grid."""


class QuadratureError(RuntimeError):
    """An adaptive quadrature failed to reach its tolerance."""


class ResolutionError(ValueError):
    """A grid is too coarse to represent the requested object."""


class AccuracyError(RuntimeError):
    """A truncation or tail estimate exceeds its permitted share of the result."""


class IntegrityError(RuntimeError):
    """A persisted artifact does not match its recorded content hash."""
