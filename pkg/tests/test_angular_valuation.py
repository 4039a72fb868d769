from math import comb, sqrt

import numpy as np
import pytest

from klain.angular_valuation import RayFunction, intrinsic_volume, mu_angular, mu_general
from klain.errors import DimensionMismatch, OddRayFunction
from klain.exterior_algebra import KVector
from klain.klain_functions import ConstantKlain, HighestWeightKlain, QuadraticForm, QuadraticKlain
from klain.lab_utils.monte_carlo import MonteCarloConfig
from klain.polytope_geometry import Polytope, make_shape


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_cube_intrinsic_volumes_are_binomials(n):
    P = make_shape("cube", n)
    for k in range(n + 1):
        assert intrinsic_volume(P, k) == pytest.approx(comb(n, k), abs=1e-10)


def test_intrinsic_volumes_of_box():
    P = make_shape("box", 3, lows=[0, 0, 0], highs=[1, 2, 3])
    assert intrinsic_volume(P, 3) == pytest.approx(6.0)
    assert intrinsic_volume(P, 2) == pytest.approx(11.0)
    assert intrinsic_volume(P, 1) == pytest.approx(6.0)


def test_euler_characteristic_valuation(small_mc):
    assert intrinsic_volume(make_shape("cube", 3), 0) == pytest.approx(1.0, abs=1e-12)
    for kind in ["simplex", "cross_polytope"]:
        estimate = mu_angular(ConstantKlain(1.0), make_shape(kind, 3), 0, small_mc)
        assert abs(estimate.value - 1.0) < 4 * estimate.standard_error


def test_top_degree_is_volume_and_next_is_half_surface():
    P = make_shape("simplex", 3)
    assert intrinsic_volume(P, 3) == pytest.approx(1 / 6)
    surface = 3 * 0.5 + sqrt(3) / 2
    assert intrinsic_volume(P, 2) == pytest.approx(surface / 2)


def test_breakdown_records_each_face():
    P = make_shape("cube", 3)
    f = QuadraticKlain(QuadraticForm.random(3, 1, seed=2))
    estimate = mu_angular(f, P, 1)
    assert len(estimate.terms) == 12
    assert estimate.standard_error == 0.0
    assert all(term.method == "exact:dihedral" for term in estimate.terms)
    assert estimate.value == pytest.approx(sum(t.contribution for t in estimate.terms))


def test_cube_edges_give_trace_of_form():
    Q = QuadraticForm.random(3, 1, seed=4)
    value = mu_angular(QuadraticKlain(Q), make_shape("cube", 3), 1).value
    # four parallel edges per axis, each with angle 1/4
    assert value == pytest.approx(np.trace(Q.matrix))


def test_translation_invariance_and_homogeneity():
    P = make_shape("cube", 3, side=1.5)
    f = QuadraticKlain(QuadraticForm.random(3, 2, seed=6, complex_entries=True))
    base = mu_angular(f, P, 2).value
    assert mu_angular(f, P.translate([0.3, -2.0, 5.0]), 2).value == pytest.approx(base, abs=1e-10)
    assert mu_angular(f, P.scale_by(2.0), 2).value == pytest.approx(4 * base, abs=1e-10)


def test_split_box_valuation_identity():
    f = QuadraticKlain(QuadraticForm.random(3, 1, seed=12))
    whole = make_shape("box", 3, lows=[0, 0, 0], highs=[2, 1, 1])
    left = make_shape("box", 3, lows=[0, 0, 0], highs=[1, 1, 1])
    right = make_shape("box", 3, lows=[1, 0, 0], highs=[2, 1, 1])
    middle = make_shape("box", 3, lows=[1, 0, 0], highs=[1, 1, 1])
    for k in (0, 1, 2):
        if k > middle.dim:
            continue
        g = f if k == 1 else ConstantKlain(1.0)
        lhs = mu_angular(g, whole, k).value + mu_angular(g, middle, k).value
        rhs = mu_angular(g, left, k).value + mu_angular(g, right, k).value
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_lower_dimensional_polytope_is_measured_in_its_hull():
    square = make_shape("box", 3, lows=[0, 0, 0], highs=[1, 1, 0])
    assert intrinsic_volume(square, 2) == pytest.approx(1.0)
    assert intrinsic_volume(square, 1) == pytest.approx(2.0)
    assert intrinsic_volume(square, 0) == pytest.approx(1.0)


def test_degree_checks():
    P = make_shape("cube", 3)
    with pytest.raises(ValueError):
        mu_angular(ConstantKlain(1.0), P, 4)
    with pytest.raises(DimensionMismatch):
        mu_angular(HighestWeightKlain(1, 0, 4), P, 2)


def test_hw_valuation_on_cube():
    # f_{2,0}(e_i ^ e_j) is 1 when exactly one of i, j lies in {1, 2}, else 0
    P = make_shape("cube", 4)
    estimate = mu_angular(HighestWeightKlain(2, 0, 4), P, 2)
    assert estimate.value == pytest.approx(4.0, abs=1e-10)


def test_general_construction_with_constant_ray_function_reproduces_angles():
    P = make_shape("simplex", 3)
    mc = MonteCarloConfig(samples=30000, seed=5, force_monte_carlo=True)
    h = RayFunction.from_klain(ConstantKlain(1.0))
    general = mu_general(h, P, 1, mc)
    angular = mu_angular(ConstantKlain(1.0), P, 1, mc)
    assert general.value == pytest.approx(angular.value, abs=1e-12)


def test_general_construction_matches_exact_angles_statistically():
    P = make_shape("cube", 3)
    f = QuadraticKlain(QuadraticForm.random(3, 1, seed=1))
    mc = MonteCarloConfig(samples=50000, seed=2)
    general = mu_general(RayFunction.from_klain(f), P, 1, mc)
    exact = mu_angular(f, P, 1).value
    assert abs(general.value - exact) < 4 * general.standard_error + 1e-12


def test_general_construction_with_ray_dependence():
    # h(E, l) = l_3^2 only sees the two horizontal facets
    P = make_shape("cube", 3)
    mc = MonteCarloConfig(samples=50000, seed=4)

    def fn(frame, rays):
        return rays[:, 2] ** 2

    h = RayFunction(fn, tag="l3^2")
    estimate = mu_general(h, P, 2, mc)
    # each facet contributes h(normal) / 2
    assert estimate.value == pytest.approx(1.0, abs=1e-12)
    assert estimate.standard_error == 0.0


def test_odd_ray_function_rejected():
    P = make_shape("cube", 3)
    h = RayFunction(lambda frame, rays: rays[:, 0], tag="odd")
    with pytest.raises(OddRayFunction):
        mu_general(h, P, 1, MonteCarloConfig(samples=1000, seed=0))


def test_box_inside_a_plane_is_klain_value_times_area():
    f = QuadraticKlain(QuadraticForm.random(3, 2, seed=21))
    rect = make_shape("box", 3, lows=[0, 0, 0], highs=[2, 0.5, 0])
    value = mu_angular(f, rect, 2).value
    assert value == pytest.approx(f(KVector.basis_vector(3, (1, 2))) * 1.0, abs=1e-12)


def test_collinear_refinement_leaves_value_unchanged():
    f = QuadraticKlain(QuadraticForm.random(2, 1, seed=5))
    square = make_shape("cube", 2)
    refined = Polytope.from_points(np.vstack([square.vertices, [[0.5, 0.0]]]))
    assert mu_angular(f, refined, 1).value == pytest.approx(mu_angular(f, square, 1).value, abs=1e-10)
