import math

import numpy as np
import pytest

from glauberopt import (
    DefaultMeasure,
    NetworkCost,
    build_graph,
    build_kernel,
    ricci_estimate,
)
from glauberopt.core import RunningAvgCost
from glauberopt.schedules import generate_iid
from glauberopt.theory import (
    BoundReport,
    RegularityError,
    TheoryConstants,
    check_suite,
    curvature_floor,
    decay_first_below,
    decay_onsets,
    decay_polynomial,
    decay_polynomial_curve,
    decentralized_regret_bound,
    invariant_shift_bound,
    run_instance,
    suite_passed,
    theory_constants,
    tracking_bound,
    tracking_bound_curve,
)


def test_curvature_floor_values(path4):
    assert curvature_floor(0.2, 2, 4) == pytest.approx(0.15)
    assert curvature_floor(0.0, 5, 4) == pytest.approx(0.25)
    with pytest.raises(RegularityError, match="regularity"):
        curvature_floor(0.5, 2, 4)


def test_invariant_shift_values():
    assert invariant_shift_bound(0.2, 4, 2, 3) == pytest.approx(2.4)
    assert invariant_shift_bound(0.0, 4, 2, 3) == 0.0
    shifts = [invariant_shift_bound(0.2, 4, 2, t) for t in range(1, 50)]
    assert all(b < a for a, b in zip(shifts, shifts[1:]))


def test_tracking_bound_base_case():
    assert tracking_bound(1, 0.15, [], 0.7) == pytest.approx(0.7)


def test_tracking_bound_constant_shift_limit():
    """With a frozen shift the envelope converges to shift / kappa."""
    kappa = 0.15
    delta = 0.4
    val = tracking_bound(4000, kappa, [delta] * 4000, 0.0)
    assert val == pytest.approx(delta / kappa, rel=1e-9)


def test_tracking_curve_matches_direct_formula():
    kappa = 0.3
    shifts = [1.0 / (s + 1) for s in range(1, 30)]
    curve = tracking_bound_curve(30, kappa, shifts, 0.25)
    for t in (1, 2, 7, 30):
        assert curve[t - 1] == pytest.approx(tracking_bound(t, kappa, shifts, 0.25),
                                             abs=1e-12)


def test_ricci_estimate_no_interaction(path4):
    """Without edge terms only the refreshed site can differ, so curvature
    is at least the activation probability."""
    mu0 = DefaultMeasure.uniform(4, 2)
    vc = np.array([[0.5, -0.5]] * 4)
    F = RunningAvgCost(4, NetworkCost(vc, np.zeros((3, 2, 2))))
    kernel = build_kernel(path4, mu0, 0.7, F)
    assert ricci_estimate(kernel) >= 0.25 - 1e-10


def test_ricci_estimate_zero_beta(path4, uniform_mu0, small_schedule):
    from glauberopt.core import update_running_average

    F = RunningAvgCost.initial(path4, 2)
    for f in small_schedule.costs[:10]:
        F = update_running_average(F, f)
    kernel = build_kernel(path4, uniform_mu0, 0.0, F)
    assert ricci_estimate(kernel) >= 0.25 - 1e-10


def test_ricci_estimate_dominates_floor(path4, uniform_mu0, small_schedule):
    run = run_instance(path4, 2, uniform_mu0, 0.2, small_schedule.costs, 10)
    assert ricci_estimate(run.kernel_at(10)) >= 0.15 - 1e-10


def test_decay_polynomial_values():
    for u in (0.0, 0.2, 0.9, 1.0):
        assert decay_polynomial(1, u) == 1.0
    for t in (1, 2, 5, 40):
        assert decay_polynomial(t, 0.0) == pytest.approx(1.0 / t)
    assert decay_polynomial(2, 0.5) == pytest.approx(1.0)


def test_decay_recurrence_identity():
    for u in (0.1, 0.3, 0.5, 0.7, 0.85, 0.9):
        for t in (1, 2, 9, 57, 200):
            lhs = decay_polynomial(t + 1, u)
            rhs = u * decay_polynomial(t, u) + 1.0 / (t + 1)
            assert abs(lhs - rhs) <= 1e-14


def test_decay_polynomial_floor():
    for u in (0.0, 0.5, 0.99):
        for t in (1, 10, 1000):
            assert decay_polynomial(t, u) >= 1.0 / t - 1e-15


def test_decay_curve_matches_direct():
    curve = decay_polynomial_curve(120, 0.85)
    for t in (1, 3, 50, 120):
        assert curve[t - 1] == pytest.approx(decay_polynomial(t, 0.85), abs=1e-13)


def test_decay_onsets_known_cases():
    assert decay_onsets(1.0, 0.0) == (1, 4)
    t0, t1 = decay_onsets(9.6, 0.85)
    assert t0 <= t1
    curve = decay_polynomial_curve(t1 + 1, 0.85)
    assert 9.6 * curve[t1 - 1] <= 0.25 < 9.6 * curve[t1 - 2]
    with pytest.raises(ValueError, match="decay"):
        decay_onsets(1.0, 1.0)


def test_decay_first_below_matches_scan():
    for u, thr in ((0.3, 0.05), (0.85, 0.02)):
        t = decay_first_below(u, thr)
        curve = decay_polynomial_curve(t + 5, u)
        assert curve[t - 1] <= thr
        assert np.all(curve[:t - 1] > thr)


def test_theory_constants_canonical(path4, uniform_mu0):
    c = theory_constants(path4, 2, uniform_mu0, 0.2)
    assert c.kappa_star == pytest.approx(0.15)
    assert c.big_k == pytest.approx(9.6)
    assert c.theta_d == pytest.approx(0.5)
    assert c.theta == pytest.approx(0.0625)
    assert 1 <= c.t_monotone <= c.t_quarter


def test_constants_validation():
    with pytest.raises(ValueError, match="kappa_star"):
        TheoryConstants(1.5, 4.0, 0.1, 0.5, 1, 2)
    with pytest.raises(ValueError, match="exceed"):
        TheoryConstants(0.3, 4.0, 0.1, 0.5, 5, 2)


def _expected_bound(n, delta, q, beta, theta_d, t_quarter, T):
    d1 = delta + 1
    slack = 1 - delta * beta
    big_k = max(n, beta * n * n * d1)
    ratio = math.log(q * q / theta_d)
    return ((n / slack) * (2 * beta**2 * n**3 * d1**2 + big_k * (n * ratio + math.log(T)))
            * math.log(T + 1)
            + 2 * (beta * n * d1) ** 2 * math.log(T + 1)
            + t_quarter * n * ratio
            + 2 * beta * n**3 * d1 / slack
            + n * math.log(1 / theta_d))


def test_decentralized_bound_hand_evaluation(path4, uniform_mu0):
    c = theory_constants(path4, 2, uniform_mu0, 0.2)
    for T in (1, 7, 200):
        expected = _expected_bound(4, 2, 2, 0.2, 0.5, c.t_quarter, T)
        assert decentralized_regret_bound(c, path4, 2, 0.2, T) == pytest.approx(expected)


def test_decentralized_bound_zero_beta_collapse(path4, uniform_mu0):
    c = theory_constants(path4, 2, uniform_mu0, 0.0)
    # only the divergence-tracking terms survive: K = n and no beta terms
    n, q, ratio = 4, 2, math.log(4 / 0.5)
    T = 9
    expected = (n * n * (n * ratio + math.log(T)) * math.log(T + 1)
                + c.t_quarter * n * ratio + n * math.log(2))
    assert decentralized_regret_bound(c, path4, 2, 0.0, T) == pytest.approx(expected)


def test_decentralized_bound_regularity_error(path4, uniform_mu0):
    c = theory_constants(path4, 2, uniform_mu0, 0.2)
    with pytest.raises(RegularityError):
        decentralized_regret_bound(c, path4, 2, 0.6, 10)


def test_bound_report_serialization():
    r = BoundReport("demo", 1.0, 2.0, 1e-9, True, context={"round": 3})
    d = r.to_dict()
    assert d["margin"] == pytest.approx(1.0)
    assert d["passed"] is True


def test_check_suite_zero_schedule(path4, uniform_mu0):
    zeros = [NetworkCost.zeros(path4, 2)] * 12
    reports = check_suite(path4, 2, uniform_mu0, 0.2, zeros, samples=50,
                          comparator_samples=200)
    assert suite_passed(reports)
    by_name = {r.name: r for r in reports}
    assert by_name["centralized-regret-bound"].lhs == pytest.approx(0.0, abs=1e-12)
    assert by_name["decentralized-regret-bound"].lhs == pytest.approx(0.0, abs=1e-12)
    assert by_name["w1-tracking"].lhs == pytest.approx(0.0, abs=1e-12)


def test_check_suite_random_schedule_passes(path4, uniform_mu0, small_schedule):
    reports = check_suite(path4, 2, uniform_mu0, 0.2, small_schedule.costs, 25,
                          samples=100, kernel_t_max=10, comparator_samples=500)
    failed = [r.name for r in reports if r.applicable and not r.passed]
    assert not failed, f"failed checks: {failed}"


def test_check_suite_gates_on_regularity(path4, uniform_mu0, small_schedule):
    """Above the mixing threshold the curvature checks are n/a, the rest run."""
    reports = check_suite(path4, 2, uniform_mu0, 0.6, small_schedule.costs, 15,
                          samples=50, kernel_t_max=5, comparator_samples=200)
    by_name = {r.name: r for r in reports}
    gated = ["adjacent-w1-contraction", "w1-tracking", "tv-vs-decay-poly",
             "decentralized-regret-bound"]
    for name in gated:
        assert not by_name[name].applicable
        assert by_name[name].passed is None
    assert by_name["detailed-balance"].applicable
    assert by_name["detailed-balance"].passed
    assert suite_passed(reports)


def test_ricci_estimate_refuses_above_cap():
    g = build_graph(10, [(i, i + 1) for i in range(1, 10)])
    mu0 = DefaultMeasure.uniform(10, 2)
    kernel = __import__("glauberopt").build_kernel(
        g, mu0, 0.05, RunningAvgCost.initial(g, 2))
    with pytest.raises(Exception, match="not computed"):
        ricci_estimate(kernel)
