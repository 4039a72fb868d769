"""
Registry of named Klain functions for the command line.

    const:<c>                 constant, c real or complex ("1", "2.5", "1+2j")
    quad:<file.json>          quadratic form loaded from JSON
    quad:identity             the Euclidean form (constant 1 on unit vectors)
    quad:random[:<seed>]      random symmetric real form
    hw:<m1>,<m2>              highest-weight function on 2-planes
    sph:<p>                   spherical family on lines of R^3
    coord:<digits>^<power>    even power of one Pluecker coordinate
    dual:<spec>               <spec> composed with the Hodge star
"""

import logging
import re
from typing import Optional

from .errors import KlainError, RegistrySpecError
from .klain_functions import (
    ConstantKlain,
    HighestWeightKlain,
    HodgeDualKlain,
    KlainFunction,
    PlueckerPowerKlain,
    QuadraticForm,
    QuadraticKlain,
    SphericalKlain,
)
from .shape_loader import load_quadratic

logger = logging.getLogger(__name__)

CONST_PAT = re.compile(r"^const:\s*(\S+)\s*$", flags=re.I)
QUAD_PAT = re.compile(r"^quad:\s*(.+?)\s*$", flags=re.I)
QUAD_RANDOM_PAT = re.compile(r"^random(?::(\d+))?$", flags=re.I)
HW_PAT = re.compile(r"^hw:\s*(\d+)\s*,\s*(-?\d+)\s*$", flags=re.I)
SPH_PAT = re.compile(r"^sph:\s*(\d+)\s*$", flags=re.I)
COORD_PAT = re.compile(r"^coord:\s*([\d,]+)\s*\^\s*(\d+)\s*$", flags=re.I)
DUAL_PAT = re.compile(r"^dual:\s*(.+)$", flags=re.I)


def _indices(text: str):
    parts = text.split(",") if "," in text else list(text)
    return [int(p) for p in parts if p]


def parse_klain_spec(spec: str, n: Optional[int] = None, k: Optional[int] = None) -> KlainFunction:
    """Build a Klain function from its registry spec for k-planes of R^n."""
    spec = spec.strip()

    m = DUAL_PAT.match(spec)
    if m:
        if n is None or k is None:
            raise RegistrySpecError("dual:<spec> needs both n and k")
        inner = parse_klain_spec(m.group(1), n, n - k)
        return HodgeDualKlain(inner, n)

    m = CONST_PAT.match(spec)
    if m:
        try:
            c = complex(m.group(1).replace("i", "j"))
        except ValueError:
            raise RegistrySpecError(f"cannot read a number from '{m.group(1)}'")
        return ConstantKlain(c, n, k)

    m = QUAD_PAT.match(spec)
    if m:
        return QuadraticKlain(_quadratic_form(m.group(1), n, k), tag=spec)

    m = HW_PAT.match(spec)
    if m:
        if k is not None and k != 2:
            raise RegistrySpecError(f"hw functions live on 2-planes, got k = {k}")
        try:
            return HighestWeightKlain(int(m.group(1)), int(m.group(2)), n)
        except KlainError as e:
            raise RegistrySpecError(f"{spec}: {e}") from e

    m = SPH_PAT.match(spec)
    if m:
        if (n is not None and n != 3) or (k is not None and k != 1):
            raise RegistrySpecError("sph functions live on lines of R^3 (n = 3, k = 1)")
        return SphericalKlain(int(m.group(1)))

    m = COORD_PAT.match(spec)
    if m:
        if n is None:
            raise RegistrySpecError("coord:<index>^<power> needs n")
        indices = _indices(m.group(1))
        if k is not None and len(indices) != k:
            raise RegistrySpecError(f"coordinate {m.group(1)} has degree {len(indices)}, not {k}")
        try:
            return PlueckerPowerKlain(indices, int(m.group(2)), n)
        except KlainError as e:
            raise RegistrySpecError(f"{spec}: {e}") from e

    raise RegistrySpecError(
        f"unknown function spec '{spec}'; expected const:c, quad:<file>, hw:m1,m2, "
        "sph:p, coord:<index>^<power> or dual:<spec>"
    )


def _quadratic_form(arg: str, n: Optional[int], k: Optional[int]) -> QuadraticForm:
    if arg.lower() == "identity":
        if n is None or k is None:
            raise RegistrySpecError("quad:identity needs both n and k")
        return QuadraticForm.identity(n, k)

    m = QUAD_RANDOM_PAT.match(arg)
    if m:
        if n is None or k is None:
            raise RegistrySpecError("quad:random needs both n and k")
        return QuadraticForm.random(n, k, seed=int(m.group(1) or 0))

    try:
        return load_quadratic(arg, n, k)
    except FileNotFoundError as e:
        raise RegistrySpecError(str(e)) from e
