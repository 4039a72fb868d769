"""
Variational experiment on the simplex family

    S(v_1, ..., v_n; t) = conv{0, v_1, ..., v_{n-1}, t v_n}

for an orthonormal basis v. The (n-2)-faces of S split into four classes
with closed-form volumes and normal-cone angles; the sign-averaged angular
valuation of degree n-2 has a derivative at t = 0+ with a closed form that
holds for every angular valuation (comp2), and a second closed form that
holds only for extendable ones (comp1). Their difference is a multiple of
the relation residual of f composed with the Hodge star.
"""

import logging
from dataclasses import dataclass
from itertools import combinations, product
from math import factorial, pi
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import DimensionMismatch, InexactAngle, InvalidShapeParameters, NotOrthonormal
from .exterior_algebra import Frame, KVector, simple
from .klain_functions import KlainFunction
from .lab_utils.config import DEFAULT_H_GRID, EXTRAPOLATION_TOLERANCE, JET_NODES, ONB_TOLERANCE
from .lab_utils.monte_carlo import MonteCarloConfig
from .lab_utils.numerics import Extrapolation, extrapolate_jet
from .angular_valuation import mu_angular
from .polytope_geometry import external_angle, face_volume, facet_omitting, make_shape

logger = logging.getLogger(__name__)


def theta_0n(t: float, n: int) -> float:
    """Normal-cone angle at the face opposite 0 and p_n."""
    return float(np.arccos(-1.0 / np.sqrt(1.0 + (n - 1) * t * t)))


def theta_0i(t: float, n: int) -> float:
    """Normal-cone angle at the face opposite 0 and p_i, i < n."""
    return float(np.arccos(-t / np.sqrt(1.0 + (n - 1) * t * t)))


def _check_basis(basis: Frame, t: Optional[float] = None):
    if basis.k != basis.n:
        raise DimensionMismatch(f"need a full basis of R^{basis.n}, got {basis.k} vectors")
    if basis.n < 3:
        raise DimensionMismatch(f"simplex experiments need n >= 3, got {basis.n}")
    err = basis.orthonormality_error()
    if err > ONB_TOLERANCE:
        raise NotOrthonormal(f"basis deviates from orthonormal by {err:.3e}")
    if t is not None and t <= 0:
        raise InvalidShapeParameters(f"simplex_S needs t > 0, got {t}")


def outer_normals(basis: Frame, t: float) -> Dict[int, np.ndarray]:
    """u_0 = (t sum_{i<n} v_i + v_n)/sqrt(1+(n-1)t^2) and u_i = -v_i; u_i is normal to the facet omitting p_i."""
    n = basis.n
    V = basis.vectors
    u0 = (t * V[:-1].sum(axis=0) + V[-1]) / np.sqrt(1.0 + (n - 1) * t * t)
    normals = {0: u0}
    for i in range(1, n + 1):
        normals[i] = -V[i - 1]
    return normals


@dataclass
class SimplexFaceTable:
    n: int
    t: float
    table: pd.DataFrame

    def max_discrepancy(self) -> float:
        if "generic_volume" not in self.table:
            return float("nan")
        dv = (self.table["volume"] - self.table["generic_volume"]).abs().max()
        da = (self.table["angle"] - self.table["generic_angle"]).abs().max()
        return float(max(dv, da))


def _face_class(i: int, j: int, n: int) -> int:
    """Class of the face F_i ∩ F_j, i < j, facets indexed by the omitted vertex."""
    if i == 0:
        return 3 if j == n else 4
    return 1 if j == n else 2


def face_table(basis: Frame, t: float, compare: bool = True) -> SimplexFaceTable:
    """Closed-form data for every (n-2)-face of S, optionally next to generic geometry."""
    _check_basis(basis, t)
    n = basis.n
    norm = factorial(n - 2)
    normals = outer_normals(basis, t)
    closed_volume = {
        1: 1.0 / norm,
        2: t / norm,
        3: np.sqrt(n - 1) / norm,
        4: np.sqrt(1.0 + (n - 2) * t * t) / norm,
    }
    closed_theta = {1: pi / 2, 2: pi / 2, 3: theta_0n(t, n), 4: theta_0i(t, n)}

    P = make_shape("simplex_S", n, basis=basis, t=t) if compare else None
    mc = MonteCarloConfig()
    records = []
    for i, j in combinations(range(n + 1), 2):
        face_class = _face_class(i, j, n)
        theta = closed_theta[face_class]
        record = {
            "face": f"F{i}∩F{j}",
            "class": face_class,
            "volume": closed_volume[face_class],
            "theta": theta,
            "angle": theta / (2 * pi),
            "normal_a": normals[i].tolist(),
            "normal_b": normals[j].tolist(),
        }
        if P is not None:
            ids = [v for v in range(n + 1) if v not in (i, j)]
            F = P.make_face(ids)
            record["generic_volume"] = face_volume(F)
            record["generic_angle"] = external_angle(P, F, mc).estimate
            record["normals_match"] = bool(
                np.allclose(facet_omitting(P, i).normal, normals[i], atol=1e-9)
                and np.allclose(facet_omitting(P, j).normal, normals[j], atol=1e-9)
            )
        records.append(record)

    return SimplexFaceTable(n, t, pd.DataFrame.from_records(records))


def theta_limits(
    n: int,
    h_grid: Sequence[float] = DEFAULT_H_GRID,
    nodes: int = JET_NODES,
    tolerance: float = EXTRAPOLATION_TOLERANCE,
) -> Dict[str, float]:
    """Extrapolated values and slopes of theta_0n and theta_0i at t = 0+."""
    if n < 3:
        raise DimensionMismatch(f"theta limits need n >= 3, got {n}")
    on = extrapolate_jet(lambda t: theta_0n(t, n), h_grid, nodes, tolerance)
    oi = extrapolate_jet(lambda t: theta_0i(t, n), h_grid, nodes, tolerance)
    return {
        "theta_0n": on.value.real,
        "theta_0n_slope": on.slope.real,
        "theta_0i": oi.value.real,
        "theta_0i_slope": oi.slope.real,
    }


def _omit(V: np.ndarray, skip: Sequence[int]) -> KVector:
    keep = [V[k] for k in range(len(V)) if k not in skip]
    return simple(keep, n=V.shape[1])


class Comp2Terms(NamedTuple):
    pair_sum: complex
    averaged: complex
    single_sum: complex

    @property
    def total(self) -> complex:
        return self.pair_sum + self.averaged + self.single_sum


def _check_function(f: KlainFunction, n: int):
    if not f.accepts(n, n - 2):
        raise DimensionMismatch(f"{f!r} is not a function on {n - 2}-planes of R^{n}")


def _pair_sum(f: KlainFunction, V: np.ndarray) -> complex:
    n = len(V)
    total = sum(f(_omit(V, (i, j))) for i, j in combinations(range(n - 1), 2))
    return total / (4 * factorial(n - 2))


def comp1_closed_form(f: KlainFunction, basis: Frame) -> complex:
    _check_basis(basis)
    _check_function(f, basis.n)
    return complex(_pair_sum(f, basis.vectors))


def comp2_terms(f: KlainFunction, basis: Frame) -> Comp2Terms:
    _check_basis(basis)
    n = basis.n
    _check_function(f, n)
    V = basis.vectors
    head = V[:-1]
    norm = factorial(n - 2)

    # the (n-2)-vectors omitting one of v_1 .. v_{n-1} (and v_n) are orthonormal
    pieces = [(-1) ** (i + 1) * _omit(head, (i,)) for i in range(n - 1)]
    values = []
    for eps in product((1.0, -1.0), repeat=n - 1):
        combo = KVector.zero(n, n - 2)
        for e, piece in zip(eps, pieces):
            combo = combo + piece * e
        values.append(f(combo / combo.norm()))
    averaged = -(n - 1) / (2 * pi * norm) * np.mean(values)

    single = sum(f(_omit(head, (i,))) for i in range(n - 1)) / (2 * pi * norm)
    return Comp2Terms(complex(_pair_sum(f, V)), complex(averaged), complex(single))


def comp2_closed_form(f: KlainFunction, basis: Frame) -> complex:
    return comp2_terms(f, basis).total


def simplex_valuation(
    f: KlainFunction, basis: Frame, t: float, mc: Optional[MonteCarloConfig] = None
) -> complex:
    """Sign-averaged mu_f(S(eps_1 v_1, ..., eps_{n-1} v_{n-1}, v_n; t)) of degree n-2."""
    n = basis.n
    V = basis.vectors
    mc = mc or MonteCarloConfig()
    total = 0j
    signs = list(product((1.0, -1.0), repeat=n - 1))
    for eps in signs:
        flipped = Frame(n, np.vstack([V[:-1] * np.array(eps)[:, None], V[-1:]]))
        estimate = mu_angular(f, make_shape("simplex_S", n, basis=flipped, t=t), n - 2, mc)
        # every (n-2)-face has a two-dimensional normal cone
        if estimate.standard_error != 0.0:
            raise InexactAngle(f"codimension-2 angles of S must be exact, got a sampled estimate at t = {t}")
        total += estimate.value
    return total / len(signs)


def averaged_derivative_experiment(
    f: KlainFunction,
    basis: Frame,
    h_grid: Sequence[float] = DEFAULT_H_GRID,
    nodes: int = JET_NODES,
    tolerance: float = EXTRAPOLATION_TOLERANCE,
    mc: Optional[MonteCarloConfig] = None,
) -> Extrapolation:
    """One-sided t-derivative at 0+ of the sign-averaged valuation of S."""
    _check_basis(basis)
    _check_function(f, basis.n)
    result = extrapolate_jet(lambda t: simplex_valuation(f, basis, t, mc), h_grid, nodes, tolerance)
    logger.info(f"derivative experiment {f.tag}: slope {result.slope:.10g} (gap {result.gap:.2e})")
    return result


def comparison_rows(f: KlainFunction, basis: Frame, experiment: Optional[Extrapolation] = None) -> List[dict]:
    """comp1, comp2 and (when given) the measured slope as report rows."""
    comp1 = comp1_closed_form(f, basis)
    terms = comp2_terms(f, basis)
    rows = [
        {"quantity": "comp1", "value": comp1},
        {"quantity": "comp2.pair_sum", "value": terms.pair_sum},
        {"quantity": "comp2.averaged", "value": terms.averaged},
        {"quantity": "comp2.single_sum", "value": terms.single_sum},
        {"quantity": "comp2", "value": terms.total},
        {"quantity": "comp2-comp1", "value": terms.total - comp1},
    ]
    if experiment is not None:
        rows.append({"quantity": "derivative", "value": experiment.slope})
        rows.append({"quantity": "derivative_gap", "value": experiment.gap})
    return rows
