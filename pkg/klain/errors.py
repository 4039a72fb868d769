"""
Exception hierarchy for the angular valuation lab.

Most errors also derive from ValueError so callers that only catch
ValueError keep working.
"""

from typing import Optional


class KlainError(Exception):
    """Base class for every error raised by the package."""


class DimensionMismatch(KlainError, ValueError):
    pass


class DegreeOverflow(KlainError, ValueError):
    pass


class InvalidOrientation(KlainError, ValueError):
    pass


class NotOrthonormal(KlainError, ValueError):
    pass


class NotUnitNorm(KlainError, ValueError):
    pass


class NotSimple(KlainError, ValueError):
    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class NotFullDimensional(KlainError, ValueError):
    pass


class FaceNotOfPolytope(KlainError, ValueError):
    pass


class DuplicateVertex(KlainError, ValueError):
    pass


class NonExtremeVertex(KlainError, ValueError):
    pass


class FacetEnumerationTooLarge(KlainError, ValueError):
    pass


class InvalidShapeParameters(KlainError, ValueError):
    pass


class InvalidWeights(KlainError, ValueError):
    pass


class OddRayFunction(KlainError, ValueError):
    pass


class SignSumTooLarge(KlainError, ValueError):
    pass


class UnderdeterminedFit(KlainError, ValueError):
    pass


class InsufficientSamples(KlainError, ValueError):
    pass


class UnstableExtrapolation(KlainError, ArithmeticError):
    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap


class InexactAngle(KlainError, ArithmeticError):
    """An angle that should come from a closed form fell through to sampling."""


class RegistrySpecError(KlainError, ValueError):
    pass


class SchemaError(KlainError, ValueError):
    """Input file rejected; carries the offending location when known."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        field: Optional[str] = None,
        line: Optional[int] = None,
    ):
        location = []
        if path:
            location.append(path)
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
        self.path = path
        self.field = field
        self.line = line
