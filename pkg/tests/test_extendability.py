from math import pi

import numpy as np
import pytest

from klain.errors import (
    DimensionMismatch,
    InsufficientSamples,
    NotOrthonormal,
    SignSumTooLarge,
    UnderdeterminedFit,
)
from klain.exterior_algebra import Frame, pluecker
from klain.extendability import (
    half_sign_vectors,
    hw_relation_sides,
    hw_relation_sides_n5,
    plucker_dimension,
    quadratic_fit,
    quadratic_space_dimension,
    relation_residual,
    relation_sides,
    relation_test,
    relation_test_general_k,
    second_family_basis,
    structured_basis,
)
from klain.klain_functions import (
    ConstantKlain,
    HighestWeightKlain,
    HodgeDualKlain,
    PlueckerPowerKlain,
    QuadraticForm,
    QuadraticKlain,
    SphericalKlain,
)
from klain.polytope_geometry import random_frame, random_onb


def test_half_sign_vectors():
    signs = half_sign_vectors(3)
    assert signs.shape == (4, 3)
    assert np.all(signs[:, 0] == 1.0)
    assert len({tuple(row) for row in signs}) == 4


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_quadratic_forms_pass(n):
    f = QuadraticKlain(QuadraticForm.random(n, 2, seed=n, complex_entries=True))
    report = relation_test(f, n, trials=10, seed=1)
    assert report.verdict == "pass"
    assert report.max_abs_residual < 1e-8


def test_identity_relation_on_standard_basis():
    f = QuadraticKlain(QuadraticForm.identity(4, 2))
    lhs, rhs = relation_sides(f, Frame.standard(4))
    assert lhs == pytest.approx(3.0)
    assert rhs == pytest.approx(3.0)


def test_hw20_fails_on_structured_basis():
    lhs, rhs = relation_sides(HighestWeightKlain(2, 0, 4), structured_basis(4, pi / 4))
    assert lhs == pytest.approx(-1 / 3, abs=1e-10)
    assert rhs == pytest.approx(1.5, abs=1e-10)
    closed_lhs, closed_rhs = hw_relation_sides(2, 0, 4, pi / 4)
    assert closed_lhs == pytest.approx(-1 / 3)
    assert closed_rhs == pytest.approx(1.5)


@pytest.mark.parametrize("m1,m2,n", [(1, 0, 3), (2, 0, 4), (3, 0, 5), (1, 1, 4), (2, 1, 4), (2, -2, 5), (3, 3, 5)])
def test_closed_form_matches_numeric_on_first_family(m1, m2, n):
    f = HighestWeightKlain(m1, m2, n)
    for phi in np.linspace(0, pi, 7):
        lhs, rhs = hw_relation_sides(m1, m2, n, phi)
        numeric = relation_residual(f, structured_basis(n, phi))
        assert abs((lhs - rhs) - numeric) < 1e-9


@pytest.mark.parametrize("m1,sign", [(1, 1), (2, 1), (2, -1), (3, 1)])
def test_closed_form_matches_numeric_on_second_family(m1, sign):
    f = HighestWeightKlain(m1, sign * m1, 5)
    for phi, psi in [(0.0, 0.0), (pi / 3, pi / 5), (0.4, 1.1), (2.0, 2.7)]:
        lhs, rhs = hw_relation_sides_n5(m1, sign, phi, psi)
        numeric = relation_residual(f, second_family_basis(5, phi, psi))
        assert abs((lhs - rhs) - numeric) < 1e-9


def test_hw22_fails_in_five_dimensions():
    residual = relation_residual(HighestWeightKlain(2, 2, 5), second_family_basis(5, pi / 3, pi / 5))
    assert -1.8 < residual.real < -1.7
    assert abs(residual.imag) < 1e-9
    report = relation_test(HighestWeightKlain(2, 2, 5), 5, trials=5, seed=0)
    assert report.verdict == "fail"
    assert report.family_max()["second"] > 1.0


def test_hw33_fails_in_four_dimensions():
    report = relation_test(HighestWeightKlain(3, 3, 4), 4, trials=10, seed=0)
    assert report.verdict == "fail"


def test_hw33_in_five_dimensions_balances_but_is_not_quadratic():
    # every basis balances the sign average, yet no quadratic form reproduces f
    f = HighestWeightKlain(3, 3, 5)
    report = relation_test(f, 5, trials=20, seed=7, certify=True)
    assert report.verdict == "pass"
    assert all(value < 1e-8 for value in report.family_max().values())
    assert report.certified is False
    assert report.fit_test_residual > 0.01
    assert "not a proof" in report.note


def test_pluecker_power_residual():
    f = PlueckerPowerKlain((1, 2), 4, 4)
    assert relation_residual(f, structured_basis(4, 0.0)) == pytest.approx(-2 / 3, abs=1e-12)


def test_spherical_family_through_hodge_star():
    two = HodgeDualKlain(SphericalKlain(2), 3)
    lhs, rhs = relation_sides(two, structured_basis(3, 0.0))
    assert lhs == pytest.approx(0.5, abs=1e-12)
    assert rhs == pytest.approx(1.0, abs=1e-12)
    for phi in (0.3, 1.2):
        s = np.sin(phi)
        expected = -s ** 4 / 2 - 3 * s ** 2 - 0.5
        assert relation_residual(two, structured_basis(3, phi)).real == pytest.approx(expected, abs=1e-10)

    one = HodgeDualKlain(SphericalKlain(1), 3)
    assert relation_test(one, 3, trials=10, seed=2).verdict == "pass"


def test_relation_input_checks():
    f = ConstantKlain(1.0)
    with pytest.raises(SignSumTooLarge):
        relation_sides(f, random_onb(21, seed=0))
    with pytest.raises(NotOrthonormal):
        relation_sides(f, Frame(3, [[1, 0, 0], [1, 1, 0], [0, 0, 1]]))
    with pytest.raises(ValueError):
        relation_sides(f, Frame.standard(2))
    with pytest.raises(DimensionMismatch):
        relation_sides(f, Frame(4, np.eye(4)[:3]))
    with pytest.raises(DimensionMismatch):
        relation_test(HighestWeightKlain(1, 0, 4), 5, trials=1)


def test_workers_do_not_change_results():
    f = HighestWeightKlain(2, 0, 4)
    serial = relation_test(f, 4, trials=8, seed=3, structured=False)
    pooled = relation_test(f, 4, trials=8, seed=3, structured=False, workers=3)
    assert [r.residual for r in serial.rows] == [r.residual for r in pooled.rows]


def test_report_table_and_summary():
    report = relation_test(HighestWeightKlain(2, 0, 4), 4, trials=4, seed=0)
    df = report.to_frame()
    assert set(df["family"]) == {"random", "first", "second"}
    assert len(df) == 4 + 16 + 64
    summary = report.to_dict()
    assert summary["verdict"] == "fail"
    assert summary["bases_checked"] == len(df)
    assert summary["certified"] is None


def test_certified_quadratic():
    f = QuadraticKlain(QuadraticForm.random(4, 2, seed=5))
    report = relation_test(f, 4, trials=4, seed=0, certify=True)
    assert report.certified is True
    assert "certifies" in report.note


def test_general_k_relation():
    assert relation_test_general_k(ConstantKlain(1.0, 5, 2), trials=5, seed=1).verdict == "pass"
    quad = QuadraticKlain(QuadraticForm.random(5, 2, seed=3))
    assert relation_test_general_k(quad, trials=10, seed=1).verdict == "pass"
    quad3 = QuadraticKlain(QuadraticForm.random(6, 3, seed=3))
    assert relation_test_general_k(quad3, trials=5, seed=1).verdict == "pass"
    power = PlueckerPowerKlain((1, 2), 4, 5)
    assert relation_test_general_k(power, trials=30, seed=1).verdict == "fail"
    with pytest.raises(ValueError):
        relation_test_general_k(ConstantKlain(1.0, 4, 3), trials=1)


@pytest.mark.parametrize("n,k,expected", [(3, 1, 6), (4, 2, 20), (5, 2, 50), (5, 3, 50)])
def test_dimension_of_quadratic_restrictions(n, k, expected):
    assert plucker_dimension(n, k) == expected
    for seed in (0, 1, 2):
        assert quadratic_space_dimension(n, k, seed=seed) == expected


def test_dimension_needs_enough_samples():
    with pytest.raises(InsufficientSamples):
        quadratic_space_dimension(4, 2, sample_count=5)


def test_quadratic_fit_recovers_values():
    Q = QuadraticForm.random(4, 2, seed=9, complex_entries=True)
    fit = quadratic_fit(QuadraticKlain(Q), 4, 2, seed=4)
    assert fit.train_residual < 1e-8
    assert fit.test_residual < 1e-8
    # the fitted matrix may differ by the Pluecker relation; the values may not
    for seed in range(5):
        xi = pluecker(random_frame(4, 2, seed))
        assert fit.form.evaluate(xi) == pytest.approx(Q.evaluate(xi), abs=1e-8)


def test_quadratic_fit_rejects_non_quadratic_and_small_samples():
    fit = quadratic_fit(HighestWeightKlain(2, 0, 4), 4, 2, seed=0)
    assert fit.test_residual > 1e-3
    with pytest.raises(UnderdeterminedFit):
        quadratic_fit(ConstantKlain(1.0), 4, 2, train_count=10)


def _battery(n):
    yield "const", ConstantKlain(1.0), True
    for seed in range(20):
        yield f"quad{seed}", QuadraticKlain(QuadraticForm.random(n, 2, seed=seed, complex_entries=seed % 2 == 1)), True
    for m1, m2 in [(1, 0), (1, 1), (1, -1)]:
        yield f"hw{m1},{m2}", HighestWeightKlain(m1, m2, n), True
    for m1, m2 in [(2, 0), (2, 2)]:
        yield f"hw{m1},{m2}", HighestWeightKlain(m1, m2, n), False
    yield "coord12^4", PlueckerPowerKlain((1, 2), 4, n), False


BATTERY = [(n, name, f, quadratic) for n in (4, 5) for name, f, quadratic in _battery(n)]


@pytest.mark.parametrize("n,name,f,quadratic", BATTERY, ids=[f"n{n}-{name}" for n, name, _, _ in BATTERY])
def test_relation_and_quadratic_fit_agree(n, name, f, quadratic):
    relation = relation_test(f, n, trials=5, seed=11)
    fit = quadratic_fit(f, n, 2, seed=11)
    assert (relation.verdict == "pass") is quadratic
    assert (fit.test_residual < 1e-6) is quadratic


@pytest.mark.parametrize("n", [4, 5])
def test_hw33_is_the_one_disagreement(n):
    f = HighestWeightKlain(3, 3, n)
    relation = relation_test(f, n, trials=5, seed=11)
    fit = quadratic_fit(f, n, 2, seed=11)
    assert fit.test_residual > 1e-2
    # in five dimensions the sign average balances although f is not quadratic
    assert relation.verdict == ("pass" if n == 5 else "fail")
