"""
Exterior algebra over R^n with complex coefficients.

A k-vector is stored densely as C(n, k) coefficients in the canonical
lexicographic basis e_I = e_{i1} ^ ... ^ e_{ik} with i1 < ... < ik.
Arrays use 0-based indices; MultiIndex labels are 1-based (e_{12} is e1 ^ e2).
The sign of every wedge is the parity of the inversions met while merging
two sorted index tuples, and that rule is the only orientation convention
used anywhere in the package.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DegreeOverflow,
    DimensionMismatch,
    InvalidOrientation,
    NotOrthonormal,
    NotSimple,
    NotUnitNorm,
)
from .lab_utils.config import (
    KERNEL_RELATIVE_THRESHOLD,
    ONB_TOLERANCE,
    ORIENTATION_TOLERANCE,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Strictly increasing 1-based index tuple naming a basis k-vector."""

    indices: Tuple[int, ...]
    n: int = field(compare=False)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"MultiIndex must be strictly increasing: {idx}")
        if idx and (idx[0] < 1 or idx[-1] > self.n):
            raise ValueError(f"MultiIndex entries must lie in [1, {self.n}]: {idx}")

    @property
    def k(self) -> int:
        return len(self.indices)

    @property
    def zero_based(self) -> Tuple[int, ...]:
        return tuple(i - 1 for i in self.indices)

    @property
    def label(self) -> str:
        sep = "," if self.n >= 10 else ""
        return "e_{" + sep.join(str(i) for i in self.indices) + "}"


@lru_cache(maxsize=None)
def basis_indices(n: int, k: int) -> Tuple[Tuple[int, ...], ...]:
    """0-based index tuples of the canonical basis of the k-th exterior power."""
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def _index_lookup(n: int, k: int) -> Dict[Tuple[int, ...], int]:
    return {idx: pos for pos, idx in enumerate(basis_indices(n, k))}


def multi_indices(n: int, k: int) -> List[MultiIndex]:
    return [MultiIndex(tuple(i + 1 for i in idx), n) for idx in basis_indices(n, k)]


def _inversions(first: Sequence[int], second: Sequence[int]) -> int:
    return sum(1 for i in first for j in second if i > j)


@lru_cache(maxsize=None)
def _wedge_table(n: int, p: int, q: int):
    rows_a, rows_b, rows_out, signs = [], [], [], []
    lookup = _index_lookup(n, p + q)
    for ia, I in enumerate(basis_indices(n, p)):
        used = set(I)
        for ib, J in enumerate(basis_indices(n, q)):
            if used.intersection(J):
                continue
            merged = tuple(sorted(I + J))
            rows_a.append(ia)
            rows_b.append(ib)
            rows_out.append(lookup[merged])
            signs.append(-1.0 if _inversions(I, J) % 2 else 1.0)
    return (
        np.array(rows_a, dtype=int),
        np.array(rows_b, dtype=int),
        np.array(rows_out, dtype=int),
        np.array(signs),
    )


@lru_cache(maxsize=None)
def _hodge_table(n: int, k: int):
    lookup = _index_lookup(n, n - k)
    targets, signs = [], []
    for I in basis_indices(n, k):
        complement = tuple(i for i in range(n) if i not in I)
        targets.append(lookup[complement])
        signs.append(-1.0 if _inversions(I, complement) % 2 else 1.0)
    return np.array(targets, dtype=int), np.array(signs)


@dataclass(frozen=True, eq=False)
class KVector:
    n: int
    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n < 0 or not 0 <= self.k <= self.n:
            raise DegreeOverflow(f"degree {self.k} is not in [0, {self.n}]")
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        expected = comb(self.n, self.k)
        if coeffs.size != expected:
            raise DimensionMismatch(
                f"a {self.k}-vector in dimension {self.n} needs {expected} "
                f"coefficients, got {coeffs.size}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, n: int, k: int) -> "KVector":
        return cls(n, k, np.zeros(comb(n, k)))

    @classmethod
    def basis_vector(
        cls, n: int, indices: Sequence[int], coefficient: complex = 1.0
    ) -> "KVector":
        """e_I for a strictly increasing 1-based index list."""
        mi = MultiIndex(tuple(indices), n)
        coeffs = np.zeros(comb(n, mi.k), dtype=complex)
        coeffs[_index_lookup(n, mi.k)[mi.zero_based]] = coefficient
        return cls(n, mi.k, coeffs)

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> "KVector":
        v = np.asarray(v, dtype=complex).reshape(-1)
        return cls(v.size, 1, v)

    @classmethod
    def volume_form(cls, n: int, sign: int = 1) -> "KVector":
        return cls(n, n, np.array([float(sign)]))

    def coefficient(self, indices: Sequence[int]) -> complex:
        mi = MultiIndex(tuple(indices), self.n)
        if mi.k != self.k:
            raise DimensionMismatch(f"index {mi.label} has degree {mi.k}, not {self.k}")
        return complex(self.coeffs[_index_lookup(self.n, self.k)[mi.zero_based]])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_real(self, tol: float = ONB_TOLERANCE) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= tol))

    def allclose(self, other: "KVector", atol: float = 1e-10) -> bool:
        self._check_compatible(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))

    def to_dict(self, atol: float = 0.0) -> Dict[str, complex]:
        labels = multi_indices(self.n, self.k)
        return {
            mi.label: complex(c)
            for mi, c in zip(labels, self.coeffs)
            if abs(c) > atol
        }

    def _check_compatible(self, other: "KVector"):
        if self.n != other.n or self.k != other.k:
            raise DimensionMismatch(
                f"({self.n}, {self.k}) and ({other.n}, {other.k}) k-vectors do not match"
            )

    def __add__(self, other: "KVector") -> "KVector":
        self._check_compatible(other)
        return KVector(self.n, self.k, self.coeffs + other.coeffs)

    def __sub__(self, other: "KVector") -> "KVector":
        self._check_compatible(other)
        return KVector(self.n, self.k, self.coeffs - other.coeffs)

    def __neg__(self) -> "KVector":
        return KVector(self.n, self.k, -self.coeffs)

    def __mul__(self, scalar: complex) -> "KVector":
        return KVector(self.n, self.k, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "KVector":
        return KVector(self.n, self.k, self.coeffs / scalar)

    def __repr__(self) -> str:
        terms = ", ".join(f"{lbl}: {c:.6g}" for lbl, c in self.to_dict(1e-15).items())
        return f"KVector(n={self.n}, k={self.k}, {{{terms}}})"


@dataclass(frozen=True, eq=False)
class Frame:
    """Ordered list of k real n-vectors, stored as the rows of a (k, n) array."""

    n: int
    vectors: np.ndarray

    def __post_init__(self):
        arr = np.array(self.vectors, dtype=float)
        arr = arr.reshape(-1, self.n) if arr.size else np.zeros((0, self.n))
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @classmethod
    def from_columns(cls, matrix: np.ndarray) -> "Frame":
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix.shape[0], matrix.T)

    @classmethod
    def standard(cls, n: int, k: Optional[int] = None) -> "Frame":
        return cls(n, np.eye(n)[: n if k is None else k])

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """n x k matrix whose columns are the frame vectors."""
        return self.vectors.T

    def __getitem__(self, i: int) -> np.ndarray:
        return self.vectors[i]

    def __len__(self) -> int:
        return self.k

    def gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T

    def orthonormality_error(self) -> float:
        if self.k == 0:
            return 0.0
        return float(np.max(np.abs(self.gram() - np.eye(self.k))))

    def is_orthonormal(self, tol: float = ONB_TOLERANCE) -> bool:
        return self.orthonormality_error() <= tol

    def projector(self) -> np.ndarray:
        return self.matrix @ self.vectors

    def span_distance(self, other: "Frame") -> float:
        """Spectral norm of the difference of the orthogonal projectors."""
        return float(np.linalg.norm(self.projector() - other.projector(), 2))

    def flipped(self, i: int = 0) -> "Frame":
        arr = np.array(self.vectors)
        arr[i] = -arr[i]
        return Frame(self.n, arr)


class SimpleFactor(NamedTuple):
    frame: Frame
    sign: int  # pluecker(frame) is sign * x
    residual: float


def gram_determinant(vectors: Sequence[Sequence[float]]) -> float:
    arr = np.asarray(vectors, dtype=float)
    if arr.size == 0:
        return 1.0
    arr = arr.reshape(len(arr), -1)
    return float(np.linalg.det(arr @ arr.T))


def compound_matrix(matrix: np.ndarray, k: int) -> np.ndarray:
    """k x k minors of an n x m matrix, rows and columns in canonical order.

    This is the matrix of the induced map on k-th exterior powers.
    """
    matrix = np.asarray(matrix)
    n, m = matrix.shape
    if k > min(n, m):
        return np.zeros((comb(n, k), comb(m, k)), dtype=matrix.dtype)
    if k == 0:
        return np.ones((1, 1), dtype=matrix.dtype)
    rows = np.array(basis_indices(n, k), dtype=int)
    cols = np.array(basis_indices(m, k), dtype=int)
    blocks = matrix[rows[:, None, :, None], cols[None, :, None, :]]
    return np.linalg.det(blocks)


def wedge(a: KVector, b: KVector) -> KVector:
    if a.n != b.n:
        raise DimensionMismatch(f"cannot wedge vectors from R^{a.n} and R^{b.n}")
    if a.k + b.k > a.n:
        raise DegreeOverflow(f"degree {a.k} + {b.k} exceeds dimension {a.n}")
    ia, ib, out_idx, signs = _wedge_table(a.n, a.k, b.k)
    out = np.zeros(comb(a.n, a.k + b.k), dtype=complex)
    np.add.at(out, out_idx, signs * a.coeffs[ia] * b.coeffs[ib])
    return KVector(a.n, a.k + b.k, out)


def inner(a: KVector, b: KVector) -> complex:
    """Sesquilinear pairing sum_I a_I * conj(b_I)."""
    a._check_compatible(b)
    return complex(np.vdot(b.coeffs, a.coeffs))


def _orientation_sign(orientation: Optional[KVector], n: int) -> float:
    if orientation is None:
        return 1.0
    if orientation.n != n or orientation.k != n:
        raise InvalidOrientation(
            f"orientation must be an {n}-vector in R^{n}, got degree {orientation.k} in R^{orientation.n}"
        )
    c = complex(orientation.coeffs[0])
    for sign in (1.0, -1.0):
        if abs(c - sign) <= ORIENTATION_TOLERANCE:
            return sign
    raise InvalidOrientation(f"orientation coefficient must be +1 or -1, got {c}")


def hodge(a: KVector, orientation: Optional[KVector] = None) -> KVector:
    """Star operator defined by xi ^ *eta = <xi, eta> omega on basis vectors."""
    sigma = _orientation_sign(orientation, a.n)
    targets, signs = _hodge_table(a.n, a.k)
    out = np.empty(comb(a.n, a.n - a.k), dtype=complex)
    out[targets] = sigma * signs * a.coeffs
    return KVector(a.n, a.n - a.k, out)


def simple(vectors: Sequence[Sequence[float]], n: Optional[int] = None) -> KVector:
    """Wedge of a list of real n-vectors; n is required for the empty list."""
    arr = np.asarray(vectors, dtype=float)
    if arr.size == 0:
        if n is None:
            raise ValueError("ambient dimension is required for an empty vector list")
        return KVector(n, 0, np.ones(1))
    arr = arr.reshape(len(arr), -1)
    k, dim = arr.shape
    if n is not None and dim != n:
        raise DimensionMismatch(f"vectors have {dim} coordinates, expected {n}")
    if k > dim:
        raise DegreeOverflow(f"cannot wedge {k} vectors in R^{dim}")
    return KVector(dim, k, compound_matrix(arr.T, k)[:, 0])


def pluecker(frame: Frame, tol: float = ONB_TOLERANCE) -> KVector:
    err = frame.orthonormality_error()
    if err > tol:
        raise NotOrthonormal(f"frame deviates from orthonormal by {err:.3e} (tol {tol:g})")
    return simple(frame.vectors, frame.n)


def _wedge_operator(x: np.ndarray, n: int, k: int) -> np.ndarray:
    """Matrix of v -> v ^ x, shape (C(n, k+1), n)."""
    ia, ib, out_idx, signs = _wedge_table(n, 1, k)
    op = np.zeros((comb(n, k + 1), n), dtype=x.dtype)
    np.add.at(op, (out_idx, ia), signs * x[ib])
    return op


def factor_simple(x: KVector, tol: float = ONB_TOLERANCE) -> SimpleFactor:
    """Orthonormal frame of the subspace {v : v ^ x = 0} of a unit simple x."""
    n, k = x.n, x.k
    norm = x.norm()
    if abs(norm - 1.0) > tol:
        raise NotUnitNorm(f"factor_simple needs a unit k-vector, got norm {norm:.12g}")
    imag = float(np.max(np.abs(x.coeffs.imag))) if x.coeffs.size else 0.0
    if imag > tol:
        raise NotSimple("complex coefficients do not span a real subspace", residual=imag)
    real = x.coeffs.real

    if k == 0:
        frame = Frame(n, np.zeros((0, n)))
    elif k == n:
        frame = Frame.standard(n)
    else:
        op = _wedge_operator(real, n, k)
        _, singular, vt = np.linalg.svd(op)
        full = np.zeros(n)
        full[: singular.size] = singular
        threshold = KERNEL_RELATIVE_THRESHOLD * max(float(singular[0]), np.finfo(float).tiny)
        kernel_dim = int(np.sum(full <= threshold))
        order = np.argsort(full, kind="stable")
        if kernel_dim != k:
            residual = float(full[order[k - 1]] / singular[0])
            raise NotSimple(
                f"v ^ x has a {kernel_dim}-dimensional kernel, expected {k}",
                residual=residual,
            )
        frame = Frame(n, vt[order[:k]])

    image = simple(frame.vectors, n).coeffs.real
    sign = 1 if float(image @ real) >= 0 else -1
    residual = float(np.linalg.norm(sign * image - real))
    if residual > max(tol, 1e-7):
        raise NotSimple(
            f"kernel frame reproduces x only up to {residual:.3e}", residual=residual
        )
    logger.debug(f"factor_simple: n={n} k={k} sign={sign} residual={residual:.2e}")
    return SimpleFactor(frame, sign, residual)


def oriented_frame(x: KVector, tol: float = ONB_TOLERANCE) -> Frame:
    """Orthonormal frame whose Pluecker image is x itself (not -x)."""
    factor = factor_simple(x, tol)
    if factor.sign < 0 and factor.frame.k > 0:
        return factor.frame.flipped(0)
    return factor.frame
