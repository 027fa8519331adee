import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdlab.init import PLUS_MINUS_ONE, XAVIER_GAUSSIAN, XAVIER_UNIFORM, InitScheme, stream
from gdlab.scalar_core import ScalarLoss, StepPlan, scalar_gradient, scalar_objective
from gdlab.theory_checks import (
    InfeasibleRegion,
    LemmaReport,
    PreconditionError,
    RegionW,
    check_flatball,
    check_gm_inequality,
    check_hessian,
    check_logab,
    check_phase_structure,
    check_pl_condition,
    check_signswitch,
    check_smallinit,
    check_step_invariants,
    flatball_radius,
    hessian_fd,
    hessian_formula,
    random_gm_samples,
    random_logab_samples,
    random_separated_init,
    run_phase_structure,
    sample_region,
    verify_suite,
)


def test_report_pass_flag_and_json():
    r = LemmaReport("x", 3, 0, 0.5, 1e-9)
    assert r.passed and r.to_dict()["pass"] is True
    bad = LemmaReport("x", 3, 1, -2.0, 1e-9)
    assert not bad.passed and bad.to_dict()["pass"] is False
    json.dumps(LemmaReport("x", 0, 0, math.inf, 0.0).to_dict())


# ---------------------------------------------------------------------------
# geometric mean


def test_gm_equal_coordinates_is_tight():
    r = check_gm_inequality([(np.array([2.0, 2.0]), 1.0)])
    assert r.passed and r.worst_margin == pytest.approx(0.0, abs=1e-15)


def test_gm_unequal_example():
    lhs = (4 - 1) * (1.5 - 1)
    rhs = (math.sqrt(6) - 1) ** 2
    assert lhs == 1.5 and rhs == pytest.approx(2.1010, abs=1e-4)
    r = check_gm_inequality([([4.0, 1.5], 1.0)])
    assert r.worst_margin == pytest.approx((rhs - lhs) / rhs)


def test_gm_sweep_and_precondition():
    assert check_gm_inequality(random_gm_samples(10**4, seed=3)).n_violations == 0
    with pytest.raises(PreconditionError):
        check_gm_inequality([([0.5, 2.0], 1.0)])


def test_gm_rejects_negative_alpha():
    # with alpha < 0 the inequality can reverse, so the guard must fire first
    with pytest.raises(PreconditionError):
        check_gm_inequality([([1.0, 5.0], -1.0)])


# ---------------------------------------------------------------------------
# log(a + b)


def test_logab_examples_and_sweep():
    assert check_logab([(1.0, 0.0)]).worst_margin == 0.0
    r = check_logab([(1.0, 1.0)])
    assert r.worst_margin == pytest.approx(1 - math.log(2))
    assert check_logab(random_logab_samples(10**5, seed=5)).passed
    with pytest.raises(PreconditionError):
        check_logab([(0.0, 1.0)])


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-6, 1e6), st.floats(0, 1e6))
def test_logab_property(a, b):
    assert check_logab([(a, b)]).passed


# ---------------------------------------------------------------------------
# small initialization


def test_smallinit_bound_formula():
    assert 0.9 ** ((11 - 1) / 2) == pytest.approx(0.59049)


def test_smallinit_gaussian_k21():
    r = check_smallinit(InitScheme(XAVIER_GAUSSIAN), 21, 0.8, 10**5, seed=1)
    assert r.details["bound"] == pytest.approx(0.8**10)
    assert 0.8**10 == pytest.approx(0.1074, abs=1e-4)
    assert r.passed


def test_smallinit_uniform_and_degenerate():
    assert check_smallinit(InitScheme(XAVIER_UNIFORM), 11, 0.9, 10**4, seed=2).passed
    r = check_smallinit(InitScheme(PLUS_MINUS_ONE), 11, 1.0, 10**4, seed=2)
    assert r.details["bound"] == 1.0 and r.passed


def test_smallinit_rejects_too_small_a():
    with pytest.raises(PreconditionError):
        check_smallinit(InitScheme(XAVIER_GAUSSIAN), 11, 0.5, 10**4)
    with pytest.raises(PreconditionError):
        check_smallinit(InitScheme(XAVIER_GAUSSIAN), 11, 0.8, 100)


# ---------------------------------------------------------------------------
# flat ball


def test_flatball_all_ones():
    assert flatball_radius(10, 1.0, 2.0, 1.0) == pytest.approx(math.log(2) / 3)
    assert math.log(2) / 3 == pytest.approx(0.2310, abs=1e-4)
    r = check_flatball(np.ones(10), ScalarLoss.quadratic(-1.0), 1.0, 2.0, 1.0, 1000, seed=0)
    assert r.passed and r.n_instances == 1000


def test_flatball_zero_perturbation_only():
    r = check_flatball(np.ones(10), ScalarLoss.quadratic(-1.0), 1.0, 2.0, 1.0, 1, seed=0)
    assert r.passed and r.n_instances == 1


def test_flatball_logistic_small_products():
    r = check_flatball(np.full(12, 0.6), ScalarLoss.logistic(), 0.004, 0.01, 0.6, 500, seed=4)
    assert r.passed


def test_flatball_precondition_errors():
    w = np.ones(5)
    w[2] = 0.1
    with pytest.raises(PreconditionError):
        check_flatball(w, ScalarLoss.quadratic(-1.0), 1.0, 2.0, 0.5)
    with pytest.raises(PreconditionError):
        check_flatball(np.full(5, 2.0), ScalarLoss.quadratic(-1.0), 1.0, 2.0, 0.5)


# ---------------------------------------------------------------------------
# PL region and Hessian


def test_region_membership():
    region = RegionW(1.0, 0.2, 0.5, 6)
    assert region.contains([0.2] + [0.5] * 5)
    assert not region.contains(np.ones(6))  # product equals y: F = 0 is outside
    assert not region.contains([0.1] + [0.5] * 5)
    assert not region.contains([0.2, 0.2] + [0.5] * 4)
    with pytest.raises(ValueError):
        RegionW(1.0, 0.5, 0.2, 3)


def test_region_sampler_stays_inside_and_reports_infeasible():
    region = RegionW(1.0, 0.2, 0.5, 6)
    pts = sample_region(region, 500, seed=1)
    assert all(region.contains(p) for p in pts)
    with pytest.raises(InfeasibleRegion):
        sample_region(RegionW(0.1, 1.0, 1.0, 3), 10)


def test_pl_corner_by_hand():
    region = RegionW(1.0, 0.2, 0.5, 6)
    w = np.array([0.2] + [0.5] * 5)
    g = scalar_gradient(w, ScalarLoss.quadratic(1.0))
    mu = 2 * 6 * 0.2**2 * 0.5 ** (2 * 4)
    assert g @ g >= mu * scalar_objective(w, ScalarLoss.quadratic(1.0))


def test_pl_sweep():
    r = check_pl_condition(RegionW(1.0, 0.2, 0.5, 6), 1000, seed=2)
    assert r.passed and r.n_instances == 1000


def test_hessian_examples():
    np.testing.assert_allclose(hessian_formula([0.7], 0.3), [[1.0]])
    H = hessian_formula([1.0, 1.0], 1.0)
    np.testing.assert_array_equal(H, np.ones((2, 2)))
    np.testing.assert_allclose(hessian_fd([1.0, 1.0], 1.0), H, atol=1e-6)
    with pytest.raises(PreconditionError):
        hessian_formula([0.0, 1.0], 1.0)


def test_hessian_random_instances_and_spectral_bound():
    rng = np.random.default_rng(8)
    for _ in range(100):
        k = int(rng.integers(1, 7))
        w = rng.uniform(0.5, 1.5, k) * rng.choice([-1, 1], k)
        assert check_hessian(w, float(rng.uniform(-2, 2))).passed
    region = RegionW(1.0, 0.2, 0.5, 6)
    for w in sample_region(region, 50, seed=3):
        r = check_hessian(w, 1.0, region)
        assert r.passed and r.details["spectral_norm"] <= region.smoothness


# ---------------------------------------------------------------------------
# sign flips


def test_signswitch_identity_and_example():
    assert check_signswitch([0.9, 1.2, 1.0], [1, 1, 1], -1.0, 1e-2, 200).passed
    r = check_signswitch([2.0, 3.0], [-1.0, 1.0], -1.0, 1e-3, 1000)
    assert r.passed and r.n_instances == 1001


def test_signswitch_random_bit_exact():
    rng = stream(99, 0)
    for _ in range(20):
        k = int(rng.integers(1, 8))
        assert check_signswitch(rng.uniform(-1.2, 1.2, k), rng.choice([-1.0, 1.0], k),
                                float(rng.uniform(-2, 2)), 1e-3, 1000).passed


def test_signswitch_detects_wrong_target_sign():
    # flipping one coordinate without flipping the target is not a symmetry
    from gdlab import theory_checks as tc

    w1, sigma = np.array([0.8, 1.1]), np.array([-1.0, 1.0])
    ws, fw = tc.scalar_trajectory(w1, ScalarLoss.quadratic(-1.0), 1e-2, 50)
    vs, fv = tc.scalar_trajectory(sigma * w1, ScalarLoss.quadratic(-1.0), 1e-2, 50)
    assert not np.array_equal(vs[-1], sigma * ws[-1])


def test_signswitch_preconditions():
    with pytest.raises(PreconditionError):
        check_signswitch([1.0, 2.0], [1.0, 0.5], -1.0, 1e-2, 10)
    with pytest.raises(PreconditionError):
        check_signswitch([1.0], [1.0], -1.0, 1e-2, 0)


# ---------------------------------------------------------------------------
# trajectories


def test_step_invariants_on_positive_trajectories():
    from gdlab.scalar_core import scalar_trajectory

    rng = np.random.default_rng(10)
    for _ in range(5):
        k = int(rng.integers(2, 8))
        ws, _ = scalar_trajectory(rng.uniform(0.6, 1.2, k), ScalarLoss.quadratic(-1.0), 1e-2, 3000)
        for name, rep in check_step_invariants(ws, -1.0, 1e-2).items():
            assert rep.passed, (name, rep)


def test_phase_structure_three_coordinates():
    r = run_phase_structure([0.9, 1.0, 1.1], -1.0, 1e-3, c4=2.5)  # 3^-2.5 < 0.1
    assert r.applicable and r.passed
    assert r.details["j_star"] == 0
    assert r.details["w_star_t0"] <= 0


def test_phase_structure_not_applicable_on_ties():
    r = run_phase_structure([0.9, 0.9, 1.1], -1.0, 1e-2)
    assert not r.applicable and r.n_instances == 0


def test_phase_structure_random_separated_inits():
    rng = stream(21, 0)
    for i in range(10):
        r = run_phase_structure(random_separated_init(rng, 3 + i % 5), -1.0, 1e-2)
        assert r.applicable and r.passed, r.details


def test_phase_structure_requires_event_recording():
    from gdlab.experiments import TrajectoryRecorder
    from gdlab.scalar_core import scalar_run

    rec = TrajectoryRecorder("every", 1)
    res = scalar_run([0.9, 1.0, 1.1], ScalarLoss.quadratic(-1.0), StepPlan(1e-2, 10**5, 0.1), rec)
    with pytest.raises(ValueError):
        check_phase_structure(rec, res, -1.0)


# ---------------------------------------------------------------------------
# suite


def test_verify_suite_quick_is_deterministic_and_passes():
    a = verify_suite(seed=3, quick=True)
    b = verify_suite(seed=3, quick=True)
    assert all(r.passed for r in a.values()), {k: r.details for k, r in a.items() if not r.passed}
    assert json.dumps({k: r.to_dict() for k, r in a.items()}, sort_keys=True) == \
        json.dumps({k: r.to_dict() for k, r in b.items()}, sort_keys=True)
