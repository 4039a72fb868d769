import numpy as np
import pytest

from klain.errors import DimensionMismatch, InvalidWeights, NotUnitNorm
from klain.exterior_algebra import Frame, KVector, pluecker
from klain.klain_functions import (
    CallableKlain,
    ConstantKlain,
    HighestWeightKlain,
    HodgeDualKlain,
    PlueckerPowerKlain,
    QuadraticForm,
    QuadraticKlain,
    SphericalKlain,
    eval_quadratic,
    eval_spherical_hw,
    evenness_defect,
)
from klain.polytope_geometry import random_frame


def e(n, *indices):
    return KVector.basis_vector(n, indices)


def plane(n, *vectors):
    return pluecker(Frame(n, vectors))


def test_quadratic_form_is_symmetrized():
    Q = QuadraticForm([[1, 2, 0], [0, 1, 0], [0, 0, 1]], 3, 1)
    assert np.allclose(Q.matrix, Q.matrix.T)
    assert Q.matrix[0, 1] == 1.0
    with pytest.raises(DimensionMismatch):
        QuadraticForm(np.eye(5), 4, 2)


def test_identity_form_is_one_on_unit_planes():
    f = QuadraticKlain(QuadraticForm.identity(4, 2))
    for seed in range(5):
        assert f(pluecker(random_frame(4, 2, seed))) == pytest.approx(1.0)


def test_squared_coordinate():
    Q = QuadraticForm.squared_coordinate(4, (1, 2))
    assert eval_quadratic(Q, e(4, 1, 2)) == pytest.approx(1.0)
    assert eval_quadratic(Q, e(4, 1, 3)) == pytest.approx(0.0)
    with pytest.raises(NotUnitNorm):
        eval_quadratic(Q, e(4, 1, 2) * 2)


def test_polarization_recovers_form():
    Q = QuadraticForm.random(4, 2, seed=3)
    a = pluecker(random_frame(4, 2, 1))
    b = pluecker(random_frame(4, 2, 2))
    total = Q.evaluate(a + b)
    assert total == pytest.approx(Q.evaluate(a) + 2 * Q.polarize(a, b) + Q.evaluate(b))


def test_constant_and_linear_combinations():
    one = ConstantKlain(1.0)
    two = ConstantKlain(2.0)
    xi = e(3, 1, 2)
    assert (one + two)(xi) == 3.0
    assert (2 * one)(xi) == 2.0
    with pytest.raises(DimensionMismatch):
        ConstantKlain(1.0, 3, 2) + ConstantKlain(1.0, 4, 2)


def test_highest_weight_values_on_coordinate_planes():
    f10 = HighestWeightKlain(1, 0)
    assert f10(e(4, 1, 2)) == pytest.approx(0.0)
    assert f10(e(4, 1, 3)) == pytest.approx(1.0)
    assert f10(e(4, 3, 4)) == pytest.approx(0.0)

    f11 = HighestWeightKlain(1, 1, 4)
    assert f11(e(4, 1, 3)) == pytest.approx(1.0)
    assert f11(e(4, 1, 2)) == pytest.approx(0.0)


def test_highest_weight_is_even_and_frame_independent():
    f = HighestWeightKlain(2, 1, 5)
    frame = random_frame(5, 2, seed=8)
    c, s = np.cos(0.7), np.sin(0.7)
    rotated = Frame(5, [c * frame[0] + s * frame[1], -s * frame[0] + c * frame[1]])
    assert f.on_frame(rotated) == pytest.approx(f.on_frame(frame), abs=1e-10)
    samples = [pluecker(random_frame(5, 2, seed)) for seed in range(5)]
    assert evenness_defect(f, samples) < 1e-10


def test_highest_weight_parameter_checks():
    with pytest.raises(InvalidWeights):
        HighestWeightKlain(1, 2)
    with pytest.raises(InvalidWeights):
        HighestWeightKlain(1, 1, 3)
    with pytest.raises(DimensionMismatch):
        HighestWeightKlain(1, 0, 4)(e(4, 1, 2, 3))


def test_spherical_family():
    f = SphericalKlain(1)
    assert f(e(3, 1)) == pytest.approx(1.0)
    assert f(e(3, 2)) == pytest.approx(-1.0)
    assert f(e(3, 3)) == pytest.approx(0.0)
    assert eval_spherical_hw(2, [0, 1, 0]) == pytest.approx(1.0)
    with pytest.raises(NotUnitNorm):
        eval_spherical_hw(1, [1, 1, 0])
    with pytest.raises(InvalidWeights):
        SphericalKlain(-1)


def test_hodge_dual_composes_with_star():
    inner = PlueckerPowerKlain((1, 2), 2, 4)
    dual = HodgeDualKlain(inner)
    assert dual.k == 2
    assert dual(e(4, 3, 4)) == pytest.approx(1.0)
    assert dual(e(4, 1, 2)) == pytest.approx(0.0)

    sph = HodgeDualKlain(SphericalKlain(1), 3)
    assert sph.k == 2
    # *(e2 ^ e3) = e1
    assert sph(e(3, 2, 3)) == pytest.approx(1.0)


def test_pluecker_power():
    f = PlueckerPowerKlain((1, 2), 4, 4)
    assert f.tag == "coord:12^4"
    c, s = np.cos(0.3), np.sin(0.3)
    xi = plane(4, [c, 0, s, 0], [0, 1, 0, 0])
    assert f(xi) == pytest.approx(c ** 4)
    with pytest.raises(InvalidWeights):
        PlueckerPowerKlain((1, 2), 3, 4)


def test_callable_klain_and_dimension_checks():
    f = CallableKlain(lambda xi: xi.coeffs[0].real ** 2, 3, 2, tag="first-squared")
    assert f(e(3, 1, 2)) == pytest.approx(1.0)
    assert f.accepts(3, 2)
    assert not f.accepts(4, 2)
    with pytest.raises(DimensionMismatch):
        f(e(4, 1, 2))
