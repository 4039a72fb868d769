"""
Extendability checks for Klain functions on 2-planes and their k-plane
generalisation.

The sign-average relation
    (n-1) * avg_eps f((sum_i eps_i u_i) / sqrt(n-1) ^ u_n) = sum_{i<n} f(u_i ^ u_n)
holds for every orthonormal basis exactly when f is the restriction of a
quadratic form on the exterior square. relation_test searches for bases that
break it; quadratic_fit looks for the quadratic form directly.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from math import comb, pi
from multiprocessing.pool import ThreadPool
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from .errors import (
    DimensionMismatch,
    InsufficientSamples,
    InvalidWeights,
    NotOrthonormal,
    SignSumTooLarge,
    UnderdeterminedFit,
)
from .exterior_algebra import Frame, KVector, compound_matrix, hodge, pluecker, simple
from .klain_functions import HighestWeightParams, KlainFunction, QuadraticForm
from .lab_utils.config import (
    FIT_CERTIFICATE_TOLERANCE,
    MAX_SIGN_SUM_DIMENSION,
    ONB_TOLERANCE,
    RANK_RELATIVE_THRESHOLD,
    RELATION_FAIL_THRESHOLD,
    RELATION_PASS_TOLERANCE,
    SECOND_FAMILY_STEPS,
    STRUCTURED_PHI_STEPS,
)
from .lab_utils.data_processor import classify_verdict, residual_table
from .polytope_geometry import random_frame, random_onb

logger = logging.getLogger(__name__)


def half_sign_vectors(m: int) -> np.ndarray:
    """Sign vectors in {-1, +1}^m with the first entry fixed to +1, shape (2^(m-1), m)."""
    if m < 1:
        raise ValueError(f"need at least one sign, got {m}")
    tails = np.array(list(product((1.0, -1.0), repeat=m - 1))).reshape(-1, m - 1)
    return np.hstack([np.ones((len(tails), 1)), tails])


class ResidualRow(NamedTuple):
    family: str
    label: str
    lhs: complex
    rhs: complex
    residual: complex


@dataclass
class RelationReport:
    function: str
    n: int
    k: int
    tolerance: float
    fail_threshold: float
    seed: int
    trials: int
    rows: List[ResidualRow] = field(default_factory=list)
    fit_test_residual: Optional[float] = None

    @property
    def max_abs_residual(self) -> float:
        return max((abs(r.residual) for r in self.rows), default=0.0)

    @property
    def verdict(self) -> str:
        return classify_verdict(self.max_abs_residual, self.tolerance, self.fail_threshold)

    @property
    def certified(self) -> Optional[bool]:
        if self.fit_test_residual is None:
            return None
        return self.fit_test_residual < FIT_CERTIFICATE_TOLERANCE

    @property
    def note(self) -> str:
        if self.verdict != "pass":
            return "violation found" if self.verdict == "fail" else "residual in the gap zone; add structured bases"
        if self.certified:
            return "no violation found; quadratic fit certifies extendability"
        return "no violation found (sampled bases only, not a proof)"

    def family_max(self) -> Dict[str, float]:
        out: Dict[str, float] = {}
        for r in self.rows:
            out[r.family] = max(out.get(r.family, 0.0), abs(r.residual))
        return out

    def to_frame(self) -> pd.DataFrame:
        return residual_table(self.rows)

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "n": self.n,
            "k": self.k,
            "tolerance": self.tolerance,
            "fail_threshold": self.fail_threshold,
            "seed": self.seed,
            "trials": self.trials,
            "bases_checked": len(self.rows),
            "max_abs_residual": self.max_abs_residual,
            "family_max": self.family_max(),
            "verdict": self.verdict,
            "fit_test_residual": self.fit_test_residual,
            "certified": self.certified,
            "note": self.note,
        }


def relation_sides(f: KlainFunction, onb: Frame) -> Tuple[complex, complex]:
    n = onb.n
    if onb.k != n:
        raise DimensionMismatch(f"relation needs a full basis of R^{n}, got {onb.k} vectors")
    if n < 3:
        raise ValueError(f"relation needs n >= 3, got {n}")
    if n > MAX_SIGN_SUM_DIMENSION:
        raise SignSumTooLarge(f"exact sign sum over 2^{n - 2} vectors capped at n <= {MAX_SIGN_SUM_DIMENSION}")
    err = onb.orthonormality_error()
    if err > ONB_TOLERANCE:
        raise NotOrthonormal(f"basis deviates from orthonormal by {err:.3e}")

    U = onb.vectors
    last = U[-1]
    rhs = sum(f(simple([U[i], last])) for i in range(n - 1))

    # f is even, so fixing eps_1 = +1 halves the work without changing the mean
    signs = half_sign_vectors(n - 1)
    scale = 1.0 / np.sqrt(n - 1)
    lhs_total = sum(f(simple([scale * (eps @ U[:-1]), last])) for eps in signs)
    lhs = (n - 1) * lhs_total / len(signs)
    return complex(lhs), complex(rhs)


def relation_residual(f: KlainFunction, onb: Frame) -> complex:
    lhs, rhs = relation_sides(f, onb)
    return lhs - rhs


def structured_basis(n: int, phi: float) -> Frame:
    """u1 = s e1 - c e3, u2 = e2, u_i = e_(i+1) for 3 <= i <= n-1, u_n = c e1 + s e3."""
    if n < 3:
        raise ValueError(f"structured basis needs n >= 3, got {n}")
    c, s = np.cos(phi), np.sin(phi)
    E = np.eye(n)
    U = np.zeros((n, n))
    U[0] = s * E[0] - c * E[2]
    U[1] = E[1]
    for i in range(2, n - 1):
        U[i] = E[i + 1]
    U[n - 1] = c * E[0] + s * E[2]
    return Frame(n, U)


def second_family_basis(n: int, phi: float, psi: float) -> Frame:
    """u1 = c(a e1 + b e3) + s e_n, u2 = s(a e1 + b e3) - c e_n, u3 = e2,
    u_i = e_i for 4 <= i <= n-1, u_n = -b e1 + a e3."""
    if n < 4:
        raise ValueError(f"second basis family needs n >= 4, got {n}")
    c, s = np.cos(phi), np.sin(phi)
    a, b = np.cos(psi), np.sin(psi)
    E = np.eye(n)
    w = a * E[0] + b * E[2]
    U = np.zeros((n, n))
    U[0] = c * w + s * E[n - 1]
    U[1] = s * w - c * E[n - 1]
    U[2] = E[1]
    for i in range(3, n - 1):
        U[i] = E[i]
    U[n - 1] = -b * E[0] + a * E[2]
    return Frame(n, U)


def structured_rows(f: KlainFunction, n: int) -> List[ResidualRow]:
    rows = []
    for j in range(STRUCTURED_PHI_STEPS):
        phi = j * pi / STRUCTURED_PHI_STEPS
        lhs, rhs = relation_sides(f, structured_basis(n, phi))
        rows.append(ResidualRow("first", f"phi={j}pi/{STRUCTURED_PHI_STEPS}", lhs, rhs, lhs - rhs))
    return rows


def second_family_rows(f: KlainFunction, n: int) -> List[ResidualRow]:
    rows = []
    for j in range(SECOND_FAMILY_STEPS):
        for l in range(SECOND_FAMILY_STEPS):
            phi = j * pi / SECOND_FAMILY_STEPS
            psi = l * pi / SECOND_FAMILY_STEPS
            lhs, rhs = relation_sides(f, second_family_basis(n, phi, psi))
            label = f"phi={j}pi/{SECOND_FAMILY_STEPS},psi={l}pi/{SECOND_FAMILY_STEPS}"
            rows.append(ResidualRow("second", label, lhs, rhs, lhs - rhs))
    return rows


def _map_trials(run, trials: int, workers: int) -> list:
    if workers > 1:
        with ThreadPool(workers) as pool:
            return pool.map(run, range(trials))
    return [run(i) for i in range(trials)]


def relation_test(
    f: KlainFunction,
    n: int,
    trials: int,
    seed: int = 0,
    tol: float = RELATION_PASS_TOLERANCE,
    fail_threshold: float = RELATION_FAIL_THRESHOLD,
    workers: int = 1,
    structured: bool = True,
    certify: bool = False,
) -> RelationReport:
    """Relation residuals over random bases plus both structured basis families."""
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if not f.accepts(n, 2):
        raise DimensionMismatch(f"{f!r} is not a function on 2-planes of R^{n}")

    seeds = np.random.SeedSequence(seed).spawn(trials)

    def run(i: int) -> ResidualRow:
        lhs, rhs = relation_sides(f, random_onb(n, seeds[i]))
        return ResidualRow("random", f"trial {i}", lhs, rhs, lhs - rhs)

    report = RelationReport(f.tag, n, 2, tol, fail_threshold, seed, trials)
    report.rows.extend(_map_trials(run, trials, workers))
    if structured:
        report.rows.extend(structured_rows(f, n))
        if n >= 4:
            report.rows.extend(second_family_rows(f, n))

    if certify:
        report.fit_test_residual = quadratic_fit(f, n, 2, seed=seed).test_residual

    logger.info(f"relation_test {f.tag} n={n}: max residual {report.max_abs_residual:.3e} -> {report.verdict}")
    return report


class RestrictedComplementKlain(KlainFunction):
    """g(W) = f(Hodge complement of W inside span(B)), W a 2-plane in B-coordinates."""

    def __init__(self, f: KlainFunction, subspace: Frame):
        m = subspace.k
        k = m - 2
        super().__init__(m, 2, f"restrict:{f.tag}")
        self.f = f
        self.ambient = subspace.n
        self.lift = compound_matrix(subspace.matrix, k)

    def evaluate(self, xi: KVector) -> complex:
        star = hodge(xi)
        lifted = KVector(self.ambient, star.k, self.lift @ star.coeffs)
        return self.f(lifted)


def relation_test_general_k(
    f: KlainFunction,
    trials: int,
    seed: int = 0,
    tol: float = RELATION_PASS_TOLERANCE,
    fail_threshold: float = RELATION_FAIL_THRESHOLD,
    workers: int = 1,
) -> RelationReport:
    """Relation test for k-plane functions via random (k+2)-dimensional subspaces."""
    if f.n is None or f.k is None:
        raise DimensionMismatch("general-k relation test needs a function with fixed n and k")
    n, k = f.n, f.k
    if not 1 <= k <= n - 2:
        raise ValueError(f"need 1 <= k <= n-2, got n={n}, k={k}")
    m = k + 2
    seeds = np.random.SeedSequence(seed).spawn(trials)

    def run(i: int) -> ResidualRow:
        subspace_seed, basis_seed = seeds[i].spawn(2)
        g = RestrictedComplementKlain(f, random_frame(n, m, subspace_seed))
        lhs, rhs = relation_sides(g, random_onb(m, basis_seed))
        return ResidualRow("subspace", f"trial {i}", lhs, rhs, lhs - rhs)

    report = RelationReport(f.tag, n, k, tol, fail_threshold, seed, trials)
    report.rows.extend(_map_trials(run, trials, workers))
    return report


def plucker_dimension(n: int, k: int) -> int:
    """Dimension of the space of quadratic restrictions to the Pluecker image."""
    return comb(n, k) * comb(n + 1, k + 1) // (n - k + 1)


def monomial_count(n: int, k: int) -> int:
    c = comb(n, k)
    return c * (c + 1) // 2


def sample_pluecker_points(n: int, k: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Real Pluecker coordinates of `count` random k-planes, shape (count, C(n, k))."""
    return np.array([pluecker(random_frame(n, k, rng)).coeffs.real for _ in range(count)])


def quadratic_monomials(points: np.ndarray) -> np.ndarray:
    """Columns x_I * x_J for I <= J in canonical order."""
    rows, cols = np.triu_indices(points.shape[1])
    return points[:, rows] * points[:, cols]


class QuadraticFit(NamedTuple):
    form: QuadraticForm
    train_residual: float
    test_residual: float
    train_count: int
    test_count: int


def quadratic_fit(
    f: KlainFunction,
    n: int,
    k: int,
    train_count: Optional[int] = None,
    test_count: int = 200,
    seed: int = 0,
) -> QuadraticFit:
    """Least-squares quadratic form matching f on sampled Pluecker points."""
    required = plucker_dimension(n, k)
    if train_count is None:
        train_count = monomial_count(n, k) + 20
    if train_count < required:
        raise UnderdeterminedFit(
            f"{train_count} training samples cannot determine a {required}-dimensional space"
        )
    if not f.accepts(n, k):
        raise DimensionMismatch(f"{f!r} is not a function on {k}-planes of R^{n}")

    rng = np.random.default_rng(seed)
    train = sample_pluecker_points(n, k, train_count, rng)
    test = sample_pluecker_points(n, k, test_count, rng)
    y_train = np.array([f(KVector(n, k, x)) for x in train], dtype=complex)
    y_test = np.array([f(KVector(n, k, x)) for x in test], dtype=complex)

    design = quadratic_monomials(train)
    coeffs, *_ = np.linalg.lstsq(design.astype(complex), y_train, rcond=None)

    size = comb(n, k)
    upper = np.zeros((size, size), dtype=complex)
    upper[np.triu_indices(size)] = coeffs
    form = QuadraticForm((upper + upper.T) / 2, n, k)

    train_residual = float(np.max(np.abs(design @ coeffs - y_train)))
    test_residual = float(np.max(np.abs(quadratic_monomials(test) @ coeffs - y_test))) if test_count else 0.0
    logger.info(f"quadratic_fit {f.tag}: train {train_residual:.2e}, test {test_residual:.2e}")
    return QuadraticFit(form, train_residual, test_residual, train_count, test_count)


def quadratic_space_dimension(n: int, k: int, sample_count: Optional[int] = None, seed: int = 0) -> int:
    """Numerical rank of quadratic monomials evaluated on sampled Pluecker points."""
    needed = monomial_count(n, k)
    sample_count = 2 * needed if sample_count is None else sample_count
    if sample_count < needed:
        raise InsufficientSamples(f"need at least {needed} samples, got {sample_count}")
    rng = np.random.default_rng(seed)
    design = quadratic_monomials(sample_pluecker_points(n, k, sample_count, rng))
    singular = np.linalg.svd(design, compute_uv=False)
    return int(np.sum(singular > RANK_RELATIVE_THRESHOLD * singular[0]))


def hw_relation_sides(m1: int, m2: int, n: int, phi: float) -> Tuple[complex, complex]:
    """Closed-form sides of the relation for f_{m1,m2} on structured_basis(n, phi)."""
    HighestWeightParams(m1, m2)
    if n < 3:
        raise InvalidWeights(f"need n >= 3, got {n}")
    if m2 != 0 and n < 4:
        raise InvalidWeights(f"m2 != 0 needs n >= 4, got n={n}")
    c, s = np.cos(phi), np.sin(phi)
    a2 = abs(m2)

    if m2 == 0:
        rhs = 1 + (n - 3) * c ** (2 * m1) + (-1) ** m1 * s ** (2 * m1)
    else:
        rhs = 1 + (-1) ** m2 * c ** (2 * m1) + (-1) ** m1 * s ** (2 * m1)

    terms = []
    for e1, e2, e3 in product((1, -1), repeat=3):
        first = (n - 2) * c ** 2 + 2j * e1 * e2 * s
        second = e2 * e3 * c * s + 1j * e1 * (e2 * s - e3 * c)
        if m2 < 0:
            second = second.conjugate()
        terms.append(first ** (m1 - a2) * second ** a2)
    lhs = 2 ** a2 / (n - 1) ** (m1 - 1) * np.mean(terms)
    return complex(lhs), complex(rhs)


def hw_relation_sides_n5(m1: int, sign_m2: int, phi: float, psi: float) -> Tuple[complex, complex]:
    """Closed-form sides for f_{m1, +-m1} at n = 5 on second_family_basis(5, phi, psi)."""
    if m1 < 0 or sign_m2 not in (1, -1):
        raise InvalidWeights(f"need m1 >= 0 and sign_m2 = +-1, got ({m1}, {sign_m2})")
    c, s = np.cos(phi), np.sin(phi)
    a, b = np.cos(psi), np.sin(psi)
    rhs = c ** (2 * m1) + s ** (2 * m1) + (-1) ** m1 * (a ** (2 * m1) + b ** (2 * m1))

    terms = []
    for e1, e2, e3, e4 in product((1, -1), repeat=4):
        base = e1 * e2 * c * s - e3 * e4 * a * b + 1j * (e1 * c + e2 * s) * (e3 * a + e4 * b)
        if sign_m2 < 0:
            base = base.conjugate()
        terms.append(base ** m1)
    lhs = 2.0 ** m1 / 4.0 ** (m1 - 1) * np.mean(terms)
    return complex(lhs), complex(rhs)
