import numpy as np

from klain.angular_valuation import intrinsic_volume
from klain.extendability import quadratic_space_dimension, relation_test
from klain.exterior_algebra import Frame
from klain.klain_functions import ConstantKlain, HighestWeightKlain, QuadraticForm, QuadraticKlain
from klain.lab_utils.monte_carlo import MonteCarloConfig
from klain.polytope_geometry import make_shape
from klain.simplex_lab import comp1_closed_form, comp2_closed_form, theta_limits


def quick_test_run():
    print("=" * 50)
    print("🚀 ANGULAR VALUATION LAB - QUICK RUN")
    print("=" * 50)

    mc = MonteCarloConfig(samples=20000, seed=0)

    print("📐 Step 1: Intrinsic volumes of the unit 3-cube...")
    cube = make_shape("cube", 3)
    volumes = [intrinsic_volume(cube, k, mc) for k in range(4)]
    print(f"   V_0..V_3 = {[round(v, 10) for v in volumes]}")
    if not np.allclose(volumes, [1, 3, 3, 1], atol=1e-10):
        print("❌ Cube intrinsic volumes are wrong")
        return False

    print("🔍 Step 2: Relation test for a random quadratic form (n=4)...")
    quad = QuadraticKlain(QuadraticForm.random(4, 2, seed=1), tag="quad:random:1")
    report = relation_test(quad, 4, trials=10, seed=1)
    print(f"   max residual {report.max_abs_residual:.2e} -> {report.verdict}")
    if report.verdict != "pass":
        print("❌ Quadratic forms must satisfy the relation")
        return False

    print("🧪 Step 3: Relation test for hw:2,0 (n=4)...")
    report = relation_test(HighestWeightKlain(2, 0, 4), 4, trials=10, seed=1)
    print(f"   max residual {report.max_abs_residual:.2e} -> {report.verdict}")
    if report.verdict != "fail":
        print("❌ hw:2,0 should violate the relation")
        return False

    print("📏 Step 4: Dimension of quadratic restrictions, (n, k) = (4, 2)...")
    rank = quadratic_space_dimension(4, 2)
    print(f"   rank {rank}")
    if rank != 20:
        print("❌ Expected 20")
        return False

    print("🔺 Step 5: Simplex closed forms and theta limits (n=4)...")
    basis = Frame.standard(4)
    one = ConstantKlain(1.0)
    print(f"   comp1 = {comp1_closed_form(one, basis):.10g}, comp2 = {comp2_closed_form(one, basis):.10g}")
    print(f"   limits = {theta_limits(4)}")

    return True


def main():
    ok = quick_test_run()
    if ok:
        print("\n" + "=" * 60)
        print("✅ ANGULAR VALUATION LAB IS WORKING!")
        print("=" * 60)
    else:
        print("\n❌ Quick run failed. Check the errors above.")


if __name__ == "__main__":
    main()
