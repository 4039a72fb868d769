"""
Angular valuations on polytopes and the general ray-function construction.

mu_angular(f, P, k) = sum over k-faces F of f(F) * gamma(F, P) * vol_k(F).
mu_general replaces f(F) * gamma(F, P) by the integral of h(F, l) over the
rays l of the normal cone, against the probability measure on all rays of
the face's orthogonal complement, and keeps the vol_k(F) weight.
"""

import logging
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from .errors import DimensionMismatch, OddRayFunction
from .exterior_algebra import Frame, pluecker
from .klain_functions import ConstantKlain, KlainFunction
from .lab_utils.config import EVENNESS_PROBES
from .lab_utils.monte_carlo import MonteCarloConfig, iter_direction_batches, sample_directions
from .polytope_geometry import (
    Face,
    Polytope,
    external_angle,
    face_volume,
    faces,
    normal_cone,
)

logger = logging.getLogger(__name__)


class FaceTerm(NamedTuple):
    vertex_ids: tuple
    klain_value: complex
    angle: float
    angle_stderr: float
    volume: float
    contribution: complex
    method: str


class ValuationEstimate(NamedTuple):
    value: complex
    standard_error: float
    terms: List[FaceTerm]


class RayFunction:
    def __init__(
        self,
        fn: Callable[[Frame, np.ndarray], np.ndarray],
        tag: str = "ray",
    ):
        """
        Function h(E, l) of a k-plane E (given by an orthonormal frame) and
        a batch of unit directions l orthogonal to E, shape (N, n).
        Must be even in l.
        """
        self.fn = fn
        self.tag = tag

    def __call__(self, frame: Frame, rays: np.ndarray) -> np.ndarray:
        rays = np.atleast_2d(np.asarray(rays, dtype=float))
        return np.asarray(self.fn(frame, rays), dtype=complex).reshape(len(rays))

    @classmethod
    def from_klain(cls, f: KlainFunction) -> "RayFunction":
        """Pull a Klain function back to the flag space (ignores the ray)."""

        def fn(frame: Frame, rays: np.ndarray) -> np.ndarray:
            return np.full(len(rays), f(pluecker(frame)), dtype=complex)

        return cls(fn, tag=f"pullback:{f.tag}")

    def evenness_defect(self, frame: Frame, directions: np.ndarray) -> float:
        if len(directions) == 0:
            return 0.0
        plus = self(frame, directions)
        minus = self(frame, -directions)
        scale = max(1.0, float(np.max(np.abs(plus))))
        return float(np.max(np.abs(plus - minus)) / scale)


def _check_degree(f: KlainFunction, P: Polytope, k: int):
    if not 0 <= k <= P.dim:
        raise ValueError(f"degree {k} is not in [0, {P.dim}] for {P!r}")
    if not f.accepts(P.n, k):
        raise DimensionMismatch(f"{f!r} is not defined on {k}-planes of R^{P.n}")


def mu_angular(
    f: KlainFunction, P: Polytope, k: int, mc: Optional[MonteCarloConfig] = None
) -> ValuationEstimate:
    mc = mc or MonteCarloConfig()
    _check_degree(f, P, k)

    terms: List[FaceTerm] = []
    total = 0j
    variance = 0.0
    for F in faces(P, k):
        volume = face_volume(F)
        if volume <= 0.0:
            continue
        angle = external_angle(P, F, mc)
        value = f(pluecker(F.direction_frame))
        contribution = value * angle.estimate * volume
        total += contribution
        variance += (abs(value) * volume * angle.standard_error) ** 2
        terms.append(
            FaceTerm(
                F.vertex_ids,
                value,
                angle.estimate,
                angle.standard_error,
                volume,
                contribution,
                angle.method,
            )
        )

    return ValuationEstimate(total, float(np.sqrt(variance)), terms)


def _ray_integral(h: RayFunction, P: Polytope, F: Face, mc: MonteCarloConfig):
    """Mean of h(F, u) * 1[u in N_F P] over uniform rays u of the complement."""
    cone = normal_cone(P, F)
    rows = cone.complement_frame.vectors
    frame = F.direction_frame

    probe_rng = np.random.default_rng(np.random.SeedSequence(mc.seed, spawn_key=(0,)))
    probes = sample_directions(probe_rng, rows, EVENNESS_PROBES)
    defect = h.evenness_defect(frame, probes)
    if defect > 1e-9:
        raise OddRayFunction(f"{h.tag} is not even in the ray (defect {defect:.2e})")

    codim = len(rows)
    if codim == 1:
        # the normal cone is the ray of the unique incident facet normal
        value = complex(h(frame, cone.facet_normals[:1])[0]) * 0.5
        return value, 0.0, "exact:facet"

    total = 0j
    total_sq = 0.0
    for batch in iter_direction_batches(rows, mc, F.vertex_ids):
        inside = cone.contains(batch)
        if np.any(inside):
            vals = h(frame, batch[inside])
            total += complex(np.sum(vals))
            total_sq += float(np.sum(np.abs(vals) ** 2))
    mean = total / mc.samples
    var = max(total_sq / mc.samples - abs(mean) ** 2, 0.0)
    return mean, float(np.sqrt(var / mc.samples)), "monte_carlo"


def mu_general(
    h: RayFunction, P: Polytope, k: int, mc: Optional[MonteCarloConfig] = None
) -> ValuationEstimate:
    mc = mc or MonteCarloConfig()
    if not 0 <= k <= P.dim:
        raise ValueError(f"degree {k} is not in [0, {P.dim}] for {P!r}")

    terms: List[FaceTerm] = []
    total = 0j
    variance = 0.0
    for F in faces(P, k):
        volume = face_volume(F)
        if volume <= 0.0:
            continue
        if F.dim == P.dim:
            # the complement is {0}; the face is its own normal-cone apex
            integral, stderr, method = complex(h(F.direction_frame, np.zeros((1, P.n)))[0]), 0.0, "exact:full"
        else:
            integral, stderr, method = _ray_integral(h, P, F, mc)
        contribution = integral * volume
        total += contribution
        variance += (volume * stderr) ** 2
        terms.append(FaceTerm(F.vertex_ids, integral, float("nan"), stderr, volume, contribution, method))

    return ValuationEstimate(total, float(np.sqrt(variance)), terms)


def intrinsic_volume(P: Polytope, k: int, mc: Optional[MonteCarloConfig] = None) -> float:
    estimate = mu_angular(ConstantKlain(1.0), P, k, mc)
    if abs(estimate.value.imag) >= 1e-12:
        raise ArithmeticError(f"intrinsic volume has imaginary part {estimate.value.imag:.3e}")
    return float(estimate.value.real)
