"""
Klain functions: even, complex-valued functions on unit simple k-vectors.

Every variant shares one calling convention, f(xi) -> complex, where xi is
the Pluecker image of a k-plane. Variants that need a frame (highest-weight
vectors) recover one with factor_simple.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from math import comb
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidWeights, NotUnitNorm
from .exterior_algebra import Frame, KVector, factor_simple, hodge, pluecker
from .lab_utils.config import ONB_TOLERANCE

logger = logging.getLogger(__name__)


class QuadraticForm:
    def __init__(self, matrix: np.ndarray, n: int, k: int):
        """Symmetric bilinear form on the k-th exterior power of R^n."""
        size = comb(n, k)
        m = np.array(matrix, dtype=complex)
        if m.shape != (size, size):
            raise DimensionMismatch(
                f"quadratic form on Lambda^{k}(R^{n}) needs a {size}x{size} matrix, "
                f"got {m.shape}"
            )
        m = (m + m.T) / 2
        m.setflags(write=False)
        self.matrix = m
        self.n = n
        self.k = k

    @classmethod
    def identity(cls, n: int, k: int) -> "QuadraticForm":
        return cls(np.eye(comb(n, k)), n, k)

    @classmethod
    def squared_coordinate(cls, n: int, indices: Sequence[int]) -> "QuadraticForm":
        """Form whose value is the square of one Pluecker coordinate."""
        e = KVector.basis_vector(n, indices)
        return cls(np.outer(e.coeffs, e.coeffs), n, e.k)

    @classmethod
    def random(cls, n: int, k: int, seed=None, complex_entries: bool = False) -> "QuadraticForm":
        rng = np.random.default_rng(seed)
        size = comb(n, k)
        m = rng.standard_normal((size, size))
        if complex_entries:
            m = m + 1j * rng.standard_normal((size, size))
        return cls(m, n, k)

    def _check(self, xi: KVector):
        if xi.n != self.n or xi.k != self.k:
            raise DimensionMismatch(
                f"form on Lambda^{self.k}(R^{self.n}) applied to a "
                f"{xi.k}-vector in R^{xi.n}"
            )

    def evaluate(self, xi: KVector) -> complex:
        self._check(xi)
        return complex(xi.coeffs @ self.matrix @ xi.coeffs)

    def polarize(self, a: KVector, b: KVector) -> complex:
        self._check(a)
        self._check(b)
        return complex(a.coeffs @ self.matrix @ b.coeffs)

    def __add__(self, other: "QuadraticForm") -> "QuadraticForm":
        return QuadraticForm(self.matrix + other.matrix, self.n, self.k)

    def __mul__(self, scalar: complex) -> "QuadraticForm":
        return QuadraticForm(self.matrix * scalar, self.n, self.k)

    __rmul__ = __mul__


@dataclass(frozen=True)
class HighestWeightParams:
    m1: int
    m2: int

    def __post_init__(self):
        if self.m1 < abs(self.m2):
            raise InvalidWeights(f"need m1 >= |m2|, got m1={self.m1}, m2={self.m2}")


def _check_unit(xi: KVector, tol: float = ONB_TOLERANCE):
    norm = xi.norm()
    if abs(norm - 1.0) > tol:
        raise NotUnitNorm(f"Klain functions take unit k-vectors, got norm {norm:.12g}")


def eval_constant(c: complex, xi: Optional[KVector] = None) -> complex:
    return complex(c)


def eval_quadratic(Q: QuadraticForm, xi: KVector) -> complex:
    _check_unit(xi)
    return Q.evaluate(xi)


def polarize(Q: QuadraticForm, a: KVector, b: KVector) -> complex:
    return Q.polarize(a, b)


def highest_weight_from_frame(params: HighestWeightParams, frame: Frame) -> complex:
    """det(A(1)A(1)^t)^(m1-|m2|) det(A(2)A(2)^t)^|m2| for an orthonormal 2-frame."""
    n = frame.n
    if params.m2 != 0 and n < 4:
        raise InvalidWeights(f"m2 != 0 needs n >= 4, got n={n}")
    X = frame.matrix  # n x 2, rows X_1 .. X_n
    row1 = X[0] + 1j * X[1]
    value = complex(row1 @ row1) ** (params.m1 - abs(params.m2))
    if params.m2 != 0:
        A2 = np.vstack([X[0] + 1j * X[1], X[2] + 1j * X[3]])
        d2 = complex(np.linalg.det(A2 @ A2.T))
        if params.m2 < 0:
            d2 = d2.conjugate()
        value *= d2 ** abs(params.m2)
    return value


def eval_highest_weight(params: HighestWeightParams, xi: KVector) -> complex:
    if xi.k != 2:
        raise DimensionMismatch(f"highest-weight functions live on 2-planes, got k={xi.k}")
    frame = factor_simple(xi).frame
    return highest_weight_from_frame(params, frame)


def eval_spherical_hw(p: int, v: Sequence[float]) -> complex:
    """(v1 - i v2)^(2p) on a unit vector of R^3."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != 3:
        raise DimensionMismatch(f"spherical family lives on R^3, got R^{v.size}")
    if p < 0:
        raise InvalidWeights(f"p must be non-negative, got {p}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > ONB_TOLERANCE:
        raise NotUnitNorm(f"expected a unit vector, got norm {norm:.12g}")
    return complex(v[0] - 1j * v[1]) ** (2 * p)


class KlainFunction(ABC):
    """Function on unit simple k-vectors of R^n; n or k left as None means any."""

    def __init__(self, n: Optional[int], k: Optional[int], tag: str):
        self.n = n
        self.k = k
        self.tag = tag

    @abstractmethod
    def evaluate(self, xi: KVector) -> complex:
        ...

    def __call__(self, xi: KVector) -> complex:
        if self.n is not None and xi.n != self.n:
            raise DimensionMismatch(f"{self.tag} is defined on R^{self.n}, got R^{xi.n}")
        if self.k is not None and xi.k != self.k:
            raise DimensionMismatch(f"{self.tag} is defined on {self.k}-planes, got k={xi.k}")
        return complex(self.evaluate(xi))

    def on_frame(self, frame: Frame) -> complex:
        return self(pluecker(frame))

    def accepts(self, n: int, k: int) -> bool:
        return (self.n is None or self.n == n) and (self.k is None or self.k == k)

    def __add__(self, other: "KlainFunction") -> "KlainFunction":
        return LinearCombinationKlain([(1.0, self), (1.0, other)])

    def __mul__(self, scalar: complex) -> "KlainFunction":
        return LinearCombinationKlain([(scalar, self)])

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.tag}, n={self.n}, k={self.k})"


class ConstantKlain(KlainFunction):
    def __init__(self, c: complex = 1.0, n: Optional[int] = None, k: Optional[int] = None):
        super().__init__(n, k, f"const:{c}")
        self.c = complex(c)

    def evaluate(self, xi: KVector) -> complex:
        return eval_constant(self.c, xi)


class QuadraticKlain(KlainFunction):
    def __init__(self, form: QuadraticForm, tag: Optional[str] = None):
        super().__init__(form.n, form.k, tag or "quad")
        self.form = form

    def evaluate(self, xi: KVector) -> complex:
        return eval_quadratic(self.form, xi)


class HighestWeightKlain(KlainFunction):
    def __init__(self, m1: int, m2: int, n: Optional[int] = None):
        self.params = HighestWeightParams(m1, m2)
        if m2 != 0 and n is not None and n < 4:
            raise InvalidWeights(f"m2 != 0 needs n >= 4, got n={n}")
        super().__init__(n, 2, f"hw:{m1},{m2}")

    def evaluate(self, xi: KVector) -> complex:
        return eval_highest_weight(self.params, xi)


class SphericalKlain(KlainFunction):
    """Lines of R^3: v -> (v1 - i v2)^(2p)."""

    def __init__(self, p: int):
        if p < 0:
            raise InvalidWeights(f"p must be non-negative, got {p}")
        super().__init__(3, 1, f"sph:{p}")
        self.p = p

    def evaluate(self, xi: KVector) -> complex:
        return eval_spherical_hw(self.p, xi.coeffs.real)


class HodgeDualKlain(KlainFunction):
    """E -> inner(E^perp), i.e. inner composed with the Hodge star."""

    def __init__(self, inner: KlainFunction, n: Optional[int] = None):
        n = inner.n if n is None else n
        if inner.n is not None and n != inner.n:
            raise DimensionMismatch(f"dual of a function on R^{inner.n} requested in R^{n}")
        k = None if (n is None or inner.k is None) else n - inner.k
        super().__init__(n, k, f"dual:{inner.tag}")
        self.inner = inner

    def evaluate(self, xi: KVector) -> complex:
        return self.inner(hodge(xi))


class PlueckerPowerKlain(KlainFunction):
    """Even power of one Pluecker coordinate, e.g. p_12^4."""

    def __init__(self, indices: Sequence[int], power: int, n: int, k: Optional[int] = None):
        indices = tuple(int(i) for i in indices)
        if power < 0 or power % 2:
            raise InvalidWeights(f"coordinate power must be even and non-negative, got {power}")
        label = "".join(str(i) for i in indices) if n < 10 else ",".join(map(str, indices))
        super().__init__(n, len(indices) if k is None else k, f"coord:{label}^{power}")
        self.indices = indices
        self.power = power

    def evaluate(self, xi: KVector) -> complex:
        return xi.coefficient(self.indices) ** self.power


class CallableKlain(KlainFunction):
    """Black-box function of the k-vector."""

    def __init__(self, fn: Callable[[KVector], complex], n: Optional[int], k: Optional[int], tag: str = "callable"):
        super().__init__(n, k, tag)
        self.fn = fn

    def evaluate(self, xi: KVector) -> complex:
        return complex(self.fn(xi))


class LinearCombinationKlain(KlainFunction):
    def __init__(self, terms: List[Tuple[complex, KlainFunction]]):
        ns = {f.n for _, f in terms if f.n is not None}
        ks = {f.k for _, f in terms if f.k is not None}
        if len(ns) > 1 or len(ks) > 1:
            raise DimensionMismatch("cannot combine Klain functions on different Grassmannians")
        tag = " + ".join(f"{c}*{f.tag}" for c, f in terms)
        super().__init__(ns.pop() if ns else None, ks.pop() if ks else None, tag)
        self.terms = list(terms)

    def evaluate(self, xi: KVector) -> complex:
        return sum(complex(c) * f(xi) for c, f in self.terms)


def evenness_defect(f: KlainFunction, samples: Sequence[KVector]) -> float:
    """max |f(xi) - f(-xi)| over the given unit simple k-vectors."""
    return max((abs(f(xi) - f(-xi)) for xi in samples), default=0.0)
