"""
Angular valuations on convex polytopes and extendability checks for Klain functions.
"""

from .angular_valuation import RayFunction, intrinsic_volume, mu_angular, mu_general
from .exterior_algebra import Frame, KVector, factor_simple, hodge, inner, pluecker, simple, wedge
from .extendability import (
    quadratic_fit,
    quadratic_space_dimension,
    relation_residual,
    relation_test,
    relation_test_general_k,
)
from .klain_functions import (
    ConstantKlain,
    HighestWeightKlain,
    HodgeDualKlain,
    QuadraticForm,
    QuadraticKlain,
    SphericalKlain,
)
from .polytope_geometry import Polytope, external_angle, faces, make_shape, random_onb
from .registry import parse_klain_spec

__all__ = [
    "ConstantKlain",
    "Frame",
    "HighestWeightKlain",
    "HodgeDualKlain",
    "KVector",
    "Polytope",
    "QuadraticForm",
    "QuadraticKlain",
    "RayFunction",
    "SphericalKlain",
    "external_angle",
    "factor_simple",
    "faces",
    "hodge",
    "inner",
    "intrinsic_volume",
    "make_shape",
    "mu_angular",
    "mu_general",
    "parse_klain_spec",
    "pluecker",
    "quadratic_fit",
    "quadratic_space_dimension",
    "random_onb",
    "relation_residual",
    "relation_test",
    "relation_test_general_k",
    "simple",
    "wedge",
]
