"""Exception types shared across the package."""


class GeometryError(Exception):
    """Base class for all errors raised by chg."""


class ZeroVector(GeometryError):
    pass


class CoincidentPoints(GeometryError):
    pass


class DimensionMismatch(GeometryError):
    pass


class NotBoundary(GeometryError):
    pass


class NotInPencil(GeometryError):
    pass


class ZeroMatrix(GeometryError):
    pass


class InKernel(GeometryError):
    pass


class NotConverged(GeometryError):
    """Raised by sequence limits; ``gap`` holds the achieved Cauchy gap."""

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class NumericalFailure(GeometryError):
    pass


class NotInK(GeometryError):
    pass


class NotTendingSimply(GeometryError):
    pass


class Undefined(GeometryError):
    pass


class PencilMismatch(GeometryError):
    pass


class DegenerateZ(GeometryError):
    pass


class ChainDegenerate(GeometryError):
    pass


class DegenerateTriple(GeometryError):
    pass


class EmptyEstimate(GeometryError):
    pass


class EmptyCloud(GeometryError):
    pass


class MarginViolated(GeometryError):
    pass


class NonInteriorBase(GeometryError):
    pass


class UnknownName(GeometryError):
    pass


class ParseError(GeometryError):
    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class NotInGroup(GeometryError):
    def __init__(self, index, residual):
        super().__init__(
            f"generator {index} is not in U(1,n): relative residual {residual:.3e}")
        self.index = index
        self.residual = residual
