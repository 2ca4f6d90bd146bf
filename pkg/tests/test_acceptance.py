"""Acceptance suite on the canonical instance.

Instance: path graph on 4 vertices (edges 1-2, 2-3, 3-4, max degree 2),
q = 2, uniform per-agent defaults, beta = 0.2 (so the contraction rate floor
is 0.15), horizon T = 200, driven by 20 i.i.d. schedules (amplitude 1) and
5 shock schedules.  One printed line per criterion; run with

    pytest tests/test_acceptance.py -v -s
"""

import math
from dataclasses import dataclass

import numpy as np
import pytest

from glauberopt import (
    DefaultMeasure,
    build_graph,
    centralized_regret_bound,
    empirical_profile_dist,
    evolve_exact,
    simulate_replicas,
    tv_distance,
    wasserstein1_hamming,
)
from glauberopt.centralized import centralized_step_recursive
from glauberopt.cli import main as cli_main
from glauberopt.measures import Dist, kl_divergence
from glauberopt.schedules import generate_iid, generate_shocks, save_schedule
from glauberopt.theory import (
    InstanceRun,
    cost_bound_reports,
    curvature_floor,
    curvature_sweep,
    decay_first_below,
    decay_onsets,
    decay_polynomial,
    decay_polynomial_curve,
    decentralized_regret_bound,
    gibbs_perturbation_reports,
    invariant_shift_bound,
    run_instance,
    theory_constants,
    tracking_bound_curve,
    tv_tracking_curve,
    w1_tracking_curve,
)

BETA = 0.2
Q = 2
T = 200
KERNEL_T = 50
IID_SEEDS = tuple(range(101, 121))
SHOCK_SEEDS = tuple(range(201, 206))
U_GRID = (0.1, 0.3, 0.5, 0.7, 0.85, 0.9)


def _line(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture(scope="session")
def graph():
    return build_graph(4, [(1, 2), (2, 3), (3, 4)])


@pytest.fixture(scope="session")
def mu0():
    return DefaultMeasure.uniform(4, Q)


@pytest.fixture(scope="session")
def schedules(graph):
    iid = [generate_iid(graph, Q, T, seed, 1.0) for seed in IID_SEEDS]
    shocks = [generate_shocks(graph, Q, T, seed, 40) for seed in SHOCK_SEEDS]
    return iid + shocks


@pytest.fixture(scope="session")
def runs(graph, mu0, schedules) -> list[InstanceRun]:
    return [run_instance(graph, Q, mu0, BETA, s.costs, T) for s in schedules]


@pytest.fixture(scope="session")
def kernel_sweeps(runs):
    """Per run: max detailed-balance violation and max invariance TV, t <= 50."""
    out = []
    for run in runs:
        worst_db = 0.0
        worst_inv = 0.0
        for t in range(1, KERNEL_T + 1):
            P = run.kernel_at(t).dense_matrix(16)
            pi = run.pi(t)
            flux = pi.p[:, None] * P
            worst_db = max(worst_db, float(np.abs(flux - flux.T).max()))
            worst_inv = max(worst_inv, tv_distance(Dist(pi.p @ P), pi))
        out.append((worst_db, worst_inv))
    return out


@pytest.fixture(scope="session")
def w1_curves(runs):
    return [w1_tracking_curve(run) for run in runs]


@pytest.fixture(scope="session")
def constants(graph, mu0):
    return theory_constants(graph, Q, mu0, BETA)


def test_criterion_01_detailed_balance(kernel_sweeps):
    worst = max(db for db, _ in kernel_sweeps)
    ok = worst <= 1e-12
    _line(1, "detailed balance", ok,
          f"max violation {worst:.3e} <= 1e-12 over 25 schedules, t <= {KERNEL_T}")
    assert ok


def test_criterion_02_invariance(kernel_sweeps):
    worst = max(inv for _, inv in kernel_sweeps)
    ok = worst <= 1e-12
    _line(2, "kernel invariance", ok,
          f"max TV {worst:.3e} <= 1e-12 over 25 schedules, t <= {KERNEL_T}")
    assert ok


def test_criterion_03_strategy_equivalence(graph, mu0, runs):
    worst = 0.0
    for run in runs:
        pi = run.mu0_dist
        for t in range(1, T + 1):
            pi = centralized_step_recursive(pi, run.schedule[t - 1], t, mu0, BETA, graph)
            worst = max(worst, tv_distance(pi, run.pi(t + 1)))
    ok = worst <= 1e-10
    _line(3, "recursive vs closed form", ok, f"max TV {worst:.3e} <= 1e-10, t <= {T}")
    assert ok


def test_criterion_04_strategy_kl_step(runs):
    scale = BETA * 4 * 3
    bound_at_9 = 2 * (scale / 10) ** 2
    assert bound_at_9 == pytest.approx(0.1152, abs=1e-12)
    worst_gap = -math.inf
    worst_at_9 = 0.0
    for run in runs:
        for t in range(1, T + 1):
            kl = kl_divergence(run.pi(t), run.pi(t + 1))
            worst_gap = max(worst_gap, kl - 2 * (scale / (t + 1)) ** 2)
            if t == 9:
                worst_at_9 = max(worst_at_9, kl)
    ok = worst_gap <= 1e-12 and worst_at_9 <= bound_at_9
    _line(4, "strategy KL step bound", ok,
          f"worst excess {worst_gap:.3e} <= 0; at t=9: {worst_at_9:.4g} <= 0.1152")
    assert ok


def test_criterion_05_centralized_regret_bound(graph, mu0, runs):
    bound_99 = centralized_regret_bound(BETA, graph, mu0.theta_d, 99)
    assert bound_99 == pytest.approx(55.82, abs=0.01)
    bounds = np.array([centralized_regret_bound(BETA, graph, mu0.theta_d, t)
                       for t in range(1, T + 1)])
    worst = max(float((run.cum_regret_centralized - bounds).max()) for run in runs)
    ok = worst <= 1e-9
    _line(5, "centralized regret envelope", ok,
          f"worst excess {worst:.3e} <= 0 at every T <= {T}; bound(99) = {bound_99:.2f}")
    assert ok


def test_criterion_06_gibbs_perturbation_random():
    reports = gibbs_perturbation_reports(samples=1000, seed=2024)
    worst = max(r.lhs for r in reports)
    ok = all(r.passed for r in reports)
    _line(6, "Gibbs perturbation + exp-moment inequalities", ok,
          f"1000 triples, worst slack {-worst:.3e} >= -1e-12")
    assert ok, [r.name for r in reports if not r.passed]


def test_criterion_07_curvature(runs, constants):
    limit = 1 - constants.kappa_star
    assert limit == pytest.approx(0.85)
    worst = 0.0
    for run in runs:
        sweep = curvature_sweep(run, KERNEL_T)
        worst = max(worst, float(sweep.max()))
    ok = worst <= limit + 1e-10
    _line(7, "adjacent-pair W1 contraction", ok,
          f"max adjacent W1 {worst:.6f} <= 0.85 + 1e-10, all pairs, t <= {KERNEL_T}")
    assert ok


def test_criterion_08_w1_tracking(graph, runs, w1_curves, constants):
    shifts = [invariant_shift_bound(BETA, 4, 2, t) for t in range(1, T + 1)]
    track = tracking_bound_curve(T, constants.kappa_star, shifts, 0.0)
    worst = max(float((w1 - track).max()) for w1 in w1_curves)
    ok = worst <= 1e-9
    _line(8, "W1 tracking envelope", ok,
          f"worst excess {worst:.3e} <= 0 for all t <= {T}, 25 schedules")
    assert ok


def test_criterion_09_decentralized_regret_and_tv(graph, mu0, runs, constants):
    bounds = np.array([decentralized_regret_bound(constants, graph, Q, BETA, t)
                       for t in range(1, T + 1)])
    decay = decay_polynomial_curve(T, 1 - constants.kappa_star)
    worst_regret = -math.inf
    worst_tv = -math.inf
    for run in runs:
        worst_regret = max(worst_regret,
                           float((run.cum_regret_decentralized - bounds).max()))
        tv = tv_tracking_curve(run)
        worst_tv = max(worst_tv, float((tv - constants.big_k * decay).max()))
    ok = worst_regret <= 1e-9 and worst_tv <= 1e-9
    _line(9, "decentralized regret + TV decay envelopes", ok,
          f"worst regret excess {worst_regret:.3e}, worst TV excess {worst_tv:.3e}")
    assert ok


def test_criterion_10a_decay_recurrence():
    worst = 0.0
    for u in U_GRID:
        for t in list(range(1, 201)) + [1000, 5000]:
            worst = max(worst, abs(decay_polynomial(t + 1, u)
                                   - (u * decay_polynomial(t, u) + 1 / (t + 1))))
    ok = worst <= 1e-14
    _line(10, "decay recurrence identity (10a)", ok, f"max residual {worst:.3e} <= 1e-14")
    assert ok


def test_criterion_10b_decay_monotone():
    worst = -math.inf
    onsets = {}
    for u in U_GRID:
        t0, _ = decay_onsets(1.0, u)
        onsets[u] = t0
        curve = decay_polynomial_curve(10**4 + 1, u)
        worst = max(worst, float(np.diff(curve[t0 - 1:]).max()))
    ok = worst < 0
    _line(10, "decay strict decrease beyond onset (10b)", ok,
          f"max consecutive diff {worst:.3e} < 0 up to t=1e4; onsets {onsets}")
    assert ok


def test_criterion_10c_decay_vanishing_horizon():
    """As stated: p_t(u) <= 1e-6 before t = 1e5.

    This clause is unattainable: p_t(u) is at least 1/t for every u (the
    s = t summand alone), so the first round with p_t <= 1e-6 is at least
    t = 1e6 regardless of u.  The measured first-passage rounds below
    confirm the analysis; the assertion is kept as stated and fails.
    """
    first = {u: decay_first_below(u, 1e-6) for u in U_GRID}
    worst = max(first.values())
    ok = worst < 10**5
    _line(10, "decay threshold 1e-6 before t=1e5 (10c)", ok,
          f"first-passage rounds {first}; all exceed 1e5 since p_t >= 1/t")
    assert ok, (
        "unattainable as stated: p_t(u) >= 1/t for every u in [0, 1], so "
        "p_t <= 1e-6 cannot occur before t = 10^6; measured first-passage "
        f"rounds: {first} (threshold is reached, but only at t >= 1.1e6)"
    )


def test_criterion_11_cost_bounds_random():
    reports = cost_bound_reports(samples=1000, seed=77, max_vertices=8, max_q=3)
    by_name = {r.name: r for r in reports}
    sup = by_name["cost-sup-norm-random"]
    lip = by_name["cost-hamming-lipschitz-random"]
    ok = sup.passed and lip.passed
    _line(11, "cost sup-norm + Hamming-Lipschitz", ok,
          f"1000 random costs (n <= 8, q <= 3): worst sup slack {-sup.lhs:.3f}, "
          f"worst Lipschitz slack {-lip.lhs:.3f}")
    assert ok


def test_criterion_12_montecarlo_vs_exact(graph, mu0, schedules):
    sched = schedules[0]
    states = simulate_replicas(sched.costs, mu0, BETA, 31415, 50, graph, 10**5,
                               [5, 20, 50])
    dists = evolve_exact(mu0, sched.costs, BETA, 50, graph)
    worst_tv = 0.0
    worst_w1 = 0.0
    for t in (5, 20, 50):
        emp = empirical_profile_dist(states[t], Q)
        worst_tv = max(worst_tv, tv_distance(emp, dists[t]))
        worst_w1 = max(worst_w1, wasserstein1_hamming(emp, dists[t], graph, Q))
    ok = worst_tv <= 0.02 and worst_w1 <= 0.08
    _line(12, "Monte Carlo vs exact evolution", ok,
          f"1e5 replicas: max TV {worst_tv:.4f} <= 0.02, max W1 gap {worst_w1:.4f} <= 0.08")
    assert ok


def test_criterion_13_sublinearity(runs):
    horizons = (50, 100, 150, 200)
    iid_runs = runs[:len(IID_SEEDS)]
    averaged = [float(np.mean([run.cum_regret_decentralized[h - 1] / h
                               for run in iid_runs]))
                for h in horizons]
    ok = all(b < a for a, b in zip(averaged, averaged[1:]))
    detail = ", ".join(f"T={h}: {v:.5f}" for h, v in zip(horizons, averaged))
    _line(13, "per-round regret strictly decreasing", ok, detail)
    assert ok


def test_criterion_14_determinism(tmp_path, graph, schedules):
    gp = tmp_path / "graph.txt"
    gp.write_text(graph.canonical_text())
    sp = tmp_path / "sched.json"
    save_schedule(schedules[0], sp, graph, Q)
    args = ["simulate", "--graph", str(gp), "--q", str(Q), "--beta", str(BETA),
            "--T", str(T), "--schedule", str(sp), "--seed", "7", "--no-plots"]
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert cli_main(args + ["--output-dir", str(out1)]) == 0
    assert cli_main(args + ["--output-dir", str(out2)]) == 0
    b1 = (out1 / "metrics.csv").read_bytes()
    b2 = (out2 / "metrics.csv").read_bytes()
    ok = b1 == b2
    _line(14, "byte-identical metrics CSV", ok,
          f"{len(b1)} bytes, identical={ok}")
    assert ok
