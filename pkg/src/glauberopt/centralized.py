"""Centralized strategy: Gibbs reweighting of the default measure by the
running cost average, instantaneous losses, the best static comparator, and
the cumulative-regret ledger with its theoretical envelope."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DENSE_CAP_DEFAULT,
    DefaultMeasure,
    NetworkCost,
    NetworkGraph,
    RunningAvgCost,
    evaluate_cost_dense,
    update_running_average,
)
from .measures import Dist, gibbs, kl_divergence, log_partition, product_dist


@dataclass(frozen=True)
class RegretLedger:
    """Per-round losses and cumulative regret against the best static play.

    Index ``t-1`` holds the round-``t`` values; ``comparator_values[T-1]`` is
    the smallest cumulative loss any fixed distribution could have achieved
    over the first ``T`` rounds.
    """

    per_round_losses: np.ndarray
    comparator_values: np.ndarray
    cumulative_regret: np.ndarray
    bound_values: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.per_round_losses)

    @property
    def final_regret(self) -> float:
        return float(self.cumulative_regret[-1])


def loss_value(nu: Dist, f_values: np.ndarray, beta: float, mu0_dist: Dist) -> float:
    """beta * <nu, f> + D(nu || mu0), with f already evaluated on the space."""
    return beta * float(nu.p @ f_values) + kl_divergence(nu, mu0_dist)


def instantaneous_loss(nu: Dist, f: NetworkCost, graph: NetworkGraph, beta: float,
                       mu0: DefaultMeasure, cap: int = DENSE_CAP_DEFAULT) -> float:
    """Loss of playing mixed profile ``nu`` against cost ``f``: expected cost
    scaled by the inertia parameter plus the effort of deviating from the
    default measure."""
    f_values = evaluate_cost_dense(f, graph, cap=cap)
    return loss_value(nu, f_values, beta, product_dist(mu0, cap))


def centralized_strategy_closed_form(running_avg: RunningAvgCost, mu0: DefaultMeasure,
                                     beta: float, graph: NetworkGraph,
                                     cap: int = DENSE_CAP_DEFAULT) -> Dist:
    """Strategy for round t+1 given the round-t running average: the default
    measure tilted by exp(-beta * F_t)."""
    f_values = evaluate_cost_dense(running_avg.avg, graph, cap=cap)
    return gibbs(product_dist(mu0, cap), -beta * f_values)


def strategy_log_weight(running_avg: RunningAvgCost, mu0: DefaultMeasure, beta: float,
                        x: np.ndarray, graph: NetworkGraph) -> float:
    """Unnormalized log weight of one profile under the next-round strategy.

    This is the above-cap access path: the decomposable energy makes single
    profiles cheap to score even when the full distribution cannot be
    materialized.  Normalization is not included.
    """
    from .core import evaluate_cost, validate_profile

    x = validate_profile(x, graph.num_vertices, mu0.q)
    log_mu0 = float(np.sum(np.log(mu0.per_vertex[np.arange(graph.num_vertices), x])))
    return log_mu0 - beta * evaluate_cost(running_avg.avg, x, graph)


def centralized_step_recursive(pi_t: Dist, f_t: NetworkCost, t: int, mu0: DefaultMeasure,
                               beta: float, graph: NetworkGraph,
                               cap: int = DENSE_CAP_DEFAULT) -> Dist:
    """One step of the mirror-descent-style recursion with step weight 1/t:

        pi_{t+1}  proportional to  (mu0^(1/t) * pi_t * exp(-(beta/t) f_t))^(t/(t+1))

    computed entirely in the log domain.  Agrees with the closed form.
    """
    if t < 1:
        raise ValueError("recursion is defined for rounds t >= 1")
    f_values = evaluate_cost_dense(f_t, graph, cap=cap)
    mu0_logp = product_dist(mu0, cap).logp
    gamma = 1.0 / t
    logits = (gamma * mu0_logp + pi_t.logp - gamma * beta * f_values) / (1.0 + gamma)
    return Dist.from_logits(logits)


def comparator_prefix_values(schedule: Sequence[NetworkCost], mu0: DefaultMeasure,
                             beta: float, graph: NetworkGraph,
                             cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """Best static cumulative loss for every prefix horizon 1..T."""
    mu0_dist = product_dist(mu0, cap)
    out = np.empty(len(schedule))
    cum = None
    for i, f in enumerate(schedule):
        fv = evaluate_cost_dense(f, graph, cap=cap)
        cum = fv if cum is None else cum + fv
        T = i + 1
        out[i] = -T * log_partition(mu0_dist, -(beta / T) * cum)
    return out


def best_static_comparator(schedule: Sequence[NetworkCost], mu0: DefaultMeasure,
                           beta: float, graph: NetworkGraph,
                           cap: int = DENSE_CAP_DEFAULT) -> tuple[Dist, float]:
    """Minimizer and value of the cumulative loss over fixed distributions.

    The minimizer is the default measure tilted by the negated scaled average
    cost; the value is -T ln <mu0, exp(-(beta/T) sum_t f_t)>.
    """
    if not schedule:
        raise ValueError("comparator needs at least one round")
    T = len(schedule)
    mu0_dist = product_dist(mu0, cap)
    cum = sum(evaluate_cost_dense(f, graph, cap=cap) for f in schedule)
    neg_energy = -(beta / T) * cum
    value = -T * log_partition(mu0_dist, neg_energy)
    return gibbs(mu0_dist, neg_energy), float(value)


def centralized_regret_bound(beta: float, graph: NetworkGraph, theta_d: float,
                             T: int) -> float:
    """Envelope for the centralized cumulative regret at horizon T:
    2 (beta n (max_degree+1))^2 ln(T+1) + n ln(1/theta_d)."""
    if T < 1:
        raise ValueError("horizon must be at least 1")
    n = graph.num_vertices
    lead = beta * n * (graph.max_degree + 1)
    return 2.0 * lead * lead * math.log(T + 1) + n * math.log(1.0 / theta_d)


def centralized_regret(schedule: Sequence[NetworkCost], mu0: DefaultMeasure,
                       beta: float, graph: NetworkGraph,
                       cap: int = DENSE_CAP_DEFAULT) -> RegretLedger:
    """Exact regret trajectory of the closed-form strategy."""
    mu0_dist = product_dist(mu0, cap)
    T = len(schedule)
    losses = np.empty(T)
    F = RunningAvgCost.initial(graph, mu0.q)
    pi = mu0_dist
    for i, f in enumerate(schedule):
        fv = evaluate_cost_dense(f, graph, cap=cap)
        losses[i] = loss_value(pi, fv, beta, mu0_dist)
        F = update_running_average(F, f)
        pi = centralized_strategy_closed_form(F, mu0, beta, graph, cap)
    comparator = comparator_prefix_values(schedule, mu0, beta, graph, cap)
    cumulative = np.cumsum(losses) - comparator
    bounds = np.array([
        centralized_regret_bound(beta, graph, mu0.theta_d, t) for t in range(1, T + 1)
    ])
    return RegretLedger(losses, comparator, cumulative, bounds)
