"""Exception types raised across the package.

Everything derives from ``SemscaleError`` so callers can catch the whole
family; each class also subclasses ``ValueError`` because these are all
input-contract violations.
"""


class SemscaleError(ValueError):
    """Base class for all semscale errors."""


class InvalidInputError(SemscaleError):
    """Input array contains NaN/Inf or has an unusable layout."""


class InvalidParamsError(SemscaleError):
    """A numeric parameter is outside its valid range."""


class InvalidShapeError(SemscaleError):
    """An array shape violates a dimensional precondition (e.g. k > n)."""


class ShapeMismatchError(SemscaleError):
    """Two inputs that must agree in length/shape do not."""


class NeedsTwoClassesError(SemscaleError):
    """An operation requires at least two distinct classes."""


class DegenerateInputError(SemscaleError):
    """Input has zero variance or is otherwise statistically degenerate."""


class InvalidScaleError(SemscaleError):
    """A semantic scale value is non-positive where positivity is required."""


class InvalidLabelError(SemscaleError):
    """A class label is outside the valid index range."""


class InvalidProbabilityError(SemscaleError):
    """A probability is outside (0, 1]."""


class DegenerateVectorError(SemscaleError):
    """A vector that must be normalized has zero norm."""


class CapacityExceededError(SemscaleError):
    """A push would grow the storage pool past its fixed capacity."""


class PoolUnderflowError(SemscaleError):
    """A pop asked for more rows than the storage pool holds."""


class MissingClassError(SemscaleError):
    """An expected class has no rows in the storage pool."""


class InsufficientSamplesError(SemscaleError):
    """A subset request exceeds the available samples."""


class InvalidHistoryError(SemscaleError):
    """A scale history contains non-positive values or is too short."""


class InvalidConfigError(SemscaleError):
    """A training configuration violates its invariants."""
