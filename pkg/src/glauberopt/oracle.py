"""Independent brute-force recomputations for spot audits.

Everything here deliberately avoids the vectorized production paths: costs
are summed term by term in pure Python, strategies are normalized by
explicit enumeration, and the comparator is minimized numerically.  The CLI
``oracle`` subcommand and the test suite use these as cross-checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .core import DefaultMeasure, NetworkCost, NetworkGraph
from .measures import Dist, optimal_tv_coupling, transport_cost, exact_transport_cost
from .core import hamming_matrix, num_profiles, profile_space


def brute_force_cost(f: NetworkCost, x, graph: NetworkGraph) -> float:
    """Term-by-term cost evaluation with compensated summation."""
    terms = []
    for v in range(graph.num_vertices):
        terms.append(float(f.vertex_costs[v][x[v]]))
    for i, (u, v) in enumerate(graph.edges):
        terms.append(float(f.edge_costs[i][x[u]][x[v]]))
    return math.fsum(terms)


def brute_force_local_cost(f: NetworkCost, v: int, a: int, boundary, graph: NetworkGraph) -> float:
    terms = [float(f.vertex_costs[v][a])]
    for u, a_u in zip(graph.adjacency[v], boundary):
        i = graph.edge_index(u, v)
        if u < v:
            terms.append(float(f.edge_costs[i][a_u][a]))
        else:
            terms.append(float(f.edge_costs[i][a][a_u]))
    return math.fsum(terms)


def brute_force_running_average(schedule, t: int) -> NetworkCost:
    """Direct batch average of the first t costs scaled by 1/(t+1)."""
    vc = sum(schedule[s].vertex_costs for s in range(t)) / (t + 1.0)
    ec = sum(schedule[s].edge_costs for s in range(t)) / (t + 1.0)
    return NetworkCost(vc, ec)


def brute_force_strategy(schedule, t: int, mu0: DefaultMeasure, beta: float,
                         graph: NetworkGraph) -> np.ndarray:
    """Round-t centralized strategy by explicit enumeration.

    Unnormalized weight of profile x: mu0(x) * exp(-beta F_{t-1}(x)), with
    F_{t-1} summed term by term over the revealed costs.
    """
    n = graph.num_vertices
    q = mu0.q
    weights = []
    for x in itertools.product(range(q), repeat=n):
        if t > 1:
            f_hist = [brute_force_cost(schedule[s], x, graph) for s in range(t - 1)]
            F = math.fsum(f_hist) / t
        else:
            F = 0.0
        log_mu0 = math.fsum(math.log(mu0.per_vertex[v][x[v]]) for v in range(n))
        weights.append(math.exp(log_mu0 - beta * F))
    z = math.fsum(weights)
    return np.array([w / z for w in weights])


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u * idx > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def projected_gradient_comparator(schedule, mu0: DefaultMeasure, beta: float,
                                  graph: NetworkGraph, iters: int = 20000,
                                  floor: float = 1e-12) -> tuple[np.ndarray, float]:
    """Minimize the cumulative loss over the simplex by projected gradient.

    Numeric audit of the closed-form comparator; the shipped path never uses
    this.
    """
    from .core import evaluate_cost_dense
    from .measures import product_dist

    T = len(schedule)
    size = num_profiles(graph.num_vertices, mu0.q)
    total_f = sum(evaluate_cost_dense(f, graph) for f in schedule)
    log_mu0 = product_dist(mu0).logp

    def objective(nu):
        nz = nu > 0
        kl = float(np.sum(nu[nz] * (np.log(nu[nz]) - log_mu0[nz])))
        return beta * float(nu @ total_f) + T * kl

    nu = np.full(size, 1.0 / size)
    best = nu.copy()
    best_val = objective(nu)
    lr = 1.0 / (4.0 * T * size)
    for _ in range(iters):
        grad = beta * total_f + T * (np.log(np.maximum(nu, floor)) - log_mu0 + 1.0)
        nu = _project_simplex(nu - lr * grad)
        val = objective(nu)
        if val < best_val:
            best_val = val
            best = nu.copy()
    return best, best_val


def random_search_comparator(schedule, mu0: DefaultMeasure, beta: float,
                             graph: NetworkGraph, samples: int = 10**4,
                             seed: int = 0) -> float:
    """Best cumulative loss over randomly sampled fixed distributions."""
    from .core import evaluate_cost_dense
    from .measures import kl_divergence, product_dist

    T = len(schedule)
    size = num_profiles(graph.num_vertices, mu0.q)
    total_f = sum(evaluate_cost_dense(f, graph) for f in schedule)
    mu0_dist = product_dist(mu0)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    best = math.inf
    for _ in range(samples):
        nu = Dist(rng.dirichlet(np.ones(size)))
        best = min(best, beta * float(nu.p @ total_f) + T * kl_divergence(nu, mu0_dist))
    return best


def w1_certificates(mu: Dist, nu: Dist, graph: NetworkGraph, q: int,
                    witnesses: int = 200, seed: int = 0) -> dict:
    """Exact W1 together with an upper certificate (an explicit feasible
    coupling) and a lower certificate (the best sampled 1-Lipschitz witness)."""
    n = graph.num_vertices
    size = num_profiles(n, q)
    H = hamming_matrix(n, q)
    exact = exact_transport_cost(mu.p, nu.p, H)
    upper = transport_cost(optimal_tv_coupling(mu, nu), np.asarray(H, dtype=float))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    lower = 0.0
    profiles = profile_space(n, q)
    for _ in range(witnesses):
        weights = rng.uniform(-1.0, 1.0, (n, q))
        # coordinate-separable functions with per-coordinate oscillation <= 1
        # are 1-Lipschitz for the Hamming metric
        weights = weights / np.maximum(weights.max(axis=1, keepdims=True)
                                       - weights.min(axis=1, keepdims=True), 1.0)
        values = np.zeros(size)
        for v in range(n):
            values += weights[v, profiles[:, v]]
        lower = max(lower, abs(float(mu.p @ values) - float(nu.p @ values)))
    return {"exact": exact, "coupling_upper_bound": upper, "lipschitz_lower_bound": lower}
