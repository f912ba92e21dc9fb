"""Exception hierarchy shared by all computation modules."""


class NormVolError(Exception):
    """Base class for every error raised by :mod:`normvol`."""


class GeometryError(NormVolError):
    """A polyhedral precondition (pointedness, dimension, boundedness) failed."""


class NotPointedError(GeometryError):
    def __init__(self, message, lineality=None):
        super().__init__(message)
        self.lineality = lineality


class NotFullDimensionalError(GeometryError):
    pass


class UnboundedError(GeometryError):
    """Raised with a recession direction (or LP ray) witnessing unboundedness."""

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class InfeasibleError(GeometryError):
    pass


class NotKltError(NormVolError):
    """The input is not (Q-Gorenstein) klt, or a weight has nonpositive log discrepancy."""


class DomainError(NormVolError):
    """A valuation/weight lies outside the interior of its admissible cone."""


class RefusedError(NormVolError):
    """A formula is only valid under an assumption the caller has not supplied."""


class ValidationError(NormVolError):
    """Malformed external input; ``pointer`` is a JSON pointer to the offending field."""

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer
