"""Decentralized strategy: single-site resampling dynamics.

Each round, one uniformly chosen agent redraws its action from its local
conditional (the per-agent default measure tilted by the running average of
the local costs it has seen, against the neighbors' current actions); all
other agents replay.  The induced one-step Markov kernel is reversible with
respect to the centralized Gibbs strategy of the same round.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .centralized import RegretLedger, centralized_regret_bound, comparator_prefix_values, loss_value
from .core import (
    DENSE_CAP_DEFAULT,
    CapExceededError,
    DefaultMeasure,
    NetworkCost,
    NetworkGraph,
    RunningAvgCost,
    check_dense_cap,
    evaluate_cost,
    evaluate_cost_dense,
    local_cost_vector,
    profile_space,
    profile_strides,
    update_running_average,
)
from .measures import Dist, product_dist

#: Boundary-configuration count above which conditional tables stay lazy.
DENSE_TABLE_CAP = 4096


def local_conditional(v: int, F_avg: RunningAvgCost, boundary, mu0: DefaultMeasure,
                      beta: float, graph: NetworkGraph) -> Dist:
    """Action distribution of agent ``v`` against a fixed boundary: the
    agent's default measure tilted by exp(-beta * local running-average cost)."""
    lc = local_cost_vector(F_avg.avg, v, boundary, graph)
    return Dist.from_logits(np.log(mu0.per_vertex[v]) - beta * lc)


class GlauberKernel:
    """One-step kernel for a fixed round, built from per-agent conditionals.

    The kernel for round t uses the running average through round t-1.
    Conditional tables are precomputed densely per vertex when the number of
    boundary configurations q^deg(v) is at most ``dense_table_cap`` and are
    otherwise filled lazily per boundary encountered.
    """

    def __init__(self, graph: NetworkGraph, mu0: DefaultMeasure, beta: float,
                 F_prev: RunningAvgCost, dense_table_cap: int = DENSE_TABLE_CAP):
        self.graph = graph
        self.mu0 = mu0
        self.beta = beta
        self.F_prev = F_prev
        self.q = mu0.q
        self.dense_table_cap = dense_table_cap
        self._adj = [np.asarray(a, dtype=np.int64) for a in graph.adjacency]
        self._tables: dict[int, np.ndarray] = {}
        self._lazy: dict[int, dict[tuple[int, ...], np.ndarray]] = {}

    # -- conditionals -----------------------------------------------------

    def _boundary_strides(self, v: int) -> np.ndarray:
        deg = self.graph.degree(v)
        return self.q ** np.arange(deg - 1, -1, -1)

    def conditional_table(self, v: int) -> np.ndarray:
        """Dense (q^deg, q) table of conditional probabilities for vertex v,
        rows indexed by the C-order encoding of the boundary actions."""
        table = self._tables.get(v)
        if table is not None:
            return table
        deg = self.graph.degree(v)
        rows = self.q**deg
        if rows > self.dense_table_cap:
            raise CapExceededError(
                f"vertex {v} has {rows} boundary configurations, above the dense "
                f"table cap {self.dense_table_cap}"
            )
        boundaries = profile_space(deg, self.q, max(rows, 1)) if deg else np.zeros((1, 0), dtype=np.int64)
        energy = np.broadcast_to(self.F_prev.avg.vertex_costs[v], (rows, self.q)).copy()
        for k, u in enumerate(self.graph.adjacency[v]):
            i = self.graph.edge_index(u, v)
            ec = self.F_prev.avg.edge_costs[i]
            if u < v:
                energy += ec[boundaries[:, k], :]
            else:
                energy += ec[:, boundaries[:, k]].T
        logits = np.log(self.mu0.per_vertex[v])[None, :] - self.beta * energy
        logits -= logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        self._tables[v] = probs
        return probs

    def conditional_probs(self, v: int, boundary: np.ndarray) -> np.ndarray:
        """Conditional action probabilities of vertex v given its boundary."""
        deg = self.graph.degree(v)
        if self.q**deg <= self.dense_table_cap:
            idx = int(np.asarray(boundary) @ self._boundary_strides(v)) if deg else 0
            return self.conditional_table(v)[idx]
        cache = self._lazy.setdefault(v, {})
        key = tuple(int(a) for a in boundary)
        probs = cache.get(key)
        if probs is None:
            probs = local_conditional(v, self.F_prev, boundary, self.mu0, self.beta, self.graph).p
            cache[key] = probs
        return probs

    def conditional(self, v: int, boundary) -> Dist:
        return Dist(self.conditional_probs(v, np.asarray(boundary, dtype=np.int64)))

    # -- dense representations --------------------------------------------

    def _state_table(self, cap: int):
        n = self.graph.num_vertices
        profiles = profile_space(n, self.q, cap)
        strides = profile_strides(n, self.q)
        return profiles, strides

    def _state_conditionals(self, v: int, profiles: np.ndarray) -> np.ndarray:
        """(S, q) conditional probabilities of vertex v at every state."""
        deg = self.graph.degree(v)
        table = self.conditional_table(v)
        if deg == 0:
            return np.broadcast_to(table[0], (profiles.shape[0], self.q))
        bidx = profiles[:, self._adj[v]] @ self._boundary_strides(v)
        return table[bidx]

    def row(self, x: np.ndarray, cap: int = DENSE_CAP_DEFAULT) -> Dist:
        """Dense one-step distribution from state ``x``.

        Mass sits only on ``x`` and its single-site variants.
        """
        n = self.graph.num_vertices
        size = check_dense_cap(n, self.q, cap)
        x = np.asarray(x, dtype=np.int64)
        strides = profile_strides(n, self.q)
        base_idx = int(x @ strides)
        p = np.zeros(size)
        for v in range(n):
            probs = self.conditional_probs(v, x[self._adj[v]])
            targets = base_idx + (np.arange(self.q) - x[v]) * strides[v]
            p[targets] += probs / n
        return Dist(p)

    def dense_matrix(self, cap: int = DENSE_TABLE_CAP) -> np.ndarray:
        """Full (S, S) transition matrix; intended for small state spaces."""
        n = self.graph.num_vertices
        size = check_dense_cap(n, self.q, cap)
        profiles, strides = self._state_table(cap)
        idx = np.arange(size)
        P = np.zeros((size, size))
        for v in range(n):
            cond = self._state_conditionals(v, profiles)
            targets = idx[:, None] + (np.arange(self.q)[None, :] - profiles[:, v][:, None]) * strides[v]
            P[idx[:, None], targets] += cond / n
        return P

    def apply(self, mu: Dist, cap: int = DENSE_CAP_DEFAULT) -> Dist:
        """Exact one-step evolution of a dense profile distribution.

        Costs O(S * n * q) by exploiting the single-site structure: the
        update at vertex v replaces the v-marginal with the conditional,
        leaving the other coordinates untouched.
        """
        n = self.graph.num_vertices
        size = check_dense_cap(n, self.q, cap)
        if len(mu) != size:
            raise ValueError("distribution does not match the profile space")
        profiles, _ = self._state_table(cap)
        shape = (self.q,) * n
        tensor = mu.p.reshape(shape)
        new_p = np.zeros(size)
        for v in range(n):
            marg = tensor.sum(axis=v, keepdims=True)
            marg_flat = np.broadcast_to(marg, shape).reshape(size)
            cond = self._state_conditionals(v, profiles)
            cond_at_state = cond[np.arange(size), profiles[:, v]]
            new_p += marg_flat * cond_at_state
        return Dist(new_p / n)


def build_kernel(graph: NetworkGraph, mu0: DefaultMeasure, beta: float,
                 F_prev: RunningAvgCost) -> GlauberKernel:
    return GlauberKernel(graph, mu0, beta, F_prev)


def kernel_row(kernel: GlauberKernel, x: np.ndarray, cap: int = DENSE_CAP_DEFAULT) -> Dist:
    return kernel.row(x, cap)


# ---------------------------------------------------------------------------
# Sample paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplePath:
    """A realized trajectory: activations, profiles, and realized costs.

    ``trajectory[t]`` is the profile after round t (row 0 is the initial
    draw); consecutive profiles differ in at most the activated coordinate.
    """

    seed: int
    activations: np.ndarray   # (T,) activated vertex per round
    trajectory: np.ndarray    # (T+1, n)
    realized_costs: np.ndarray  # (T,) f_t evaluated at the round-t profile

    @property
    def horizon(self) -> int:
        return len(self.activations)

    def cumulative_realized_cost(self) -> np.ndarray:
        """Cumulative realized cost; the sample-path proxy for performance
        tracking when the profile space is too large for exact losses."""
        return np.cumsum(self.realized_costs)


def _sample_index(probs: np.ndarray, u: float) -> int:
    """Inverse-CDF draw; boundary ties resolve toward the lower index."""
    cdf = np.cumsum(probs)
    return min(int(np.searchsorted(cdf, u, side="left")), len(probs) - 1)


def _substreams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent activation and action-sampling streams from one seed."""
    act_ss, samp_ss = np.random.SeedSequence(seed).spawn(2)
    return (
        np.random.Generator(np.random.Philox(act_ss)),
        np.random.Generator(np.random.Philox(samp_ss)),
    )


def simulate_path(schedule: Sequence[NetworkCost], mu0: DefaultMeasure, beta: float,
                  seed: int, T: int, graph: NetworkGraph) -> SamplePath:
    """Run one trajectory of the protocol for T rounds.

    Reproducible: the activation sequence and the action draws come from
    independent counter-based substreams of ``seed``, so replicas sharing an
    activation schedule can be produced by reusing the activation stream.
    """
    if T > len(schedule):
        raise ValueError(f"schedule supplies {len(schedule)} rounds, need {T}")
    n = graph.num_vertices
    rng_act, rng_samp = _substreams(seed)
    x = mu0.sample_profiles(rng_samp, 1)[0]
    F = RunningAvgCost.initial(graph, mu0.q)
    activations = np.empty(T, dtype=np.int64)
    trajectory = np.empty((T + 1, n), dtype=np.int64)
    costs = np.empty(T)
    trajectory[0] = x
    for t in range(1, T + 1):
        v = int(rng_act.integers(n))
        activations[t - 1] = v
        boundary = x[np.asarray(graph.adjacency[v], dtype=np.int64)]
        probs = local_conditional(v, F, boundary, mu0, beta, graph).p
        x[v] = _sample_index(probs, rng_samp.random())
        trajectory[t] = x
        f_t = schedule[t - 1]
        costs[t - 1] = evaluate_cost(f_t, x, graph)
        F = update_running_average(F, f_t)
    return SamplePath(seed, activations, trajectory, costs)


def simulate_replicas(schedule: Sequence[NetworkCost], mu0: DefaultMeasure, beta: float,
                      seed: int, T: int, graph: NetworkGraph, replicas: int,
                      checkpoints: Sequence[int]) -> dict[int, np.ndarray]:
    """Simulate many independent trajectories at once (vectorized over
    replicas) and return the profile matrix (replicas, n) at each checkpoint.

    Equivalent in law to independent :func:`simulate_path` runs, but the
    random streams interleave differently, so individual trajectories are
    not stream-compatible with the single-path variant.
    """
    if T > len(schedule):
        raise ValueError(f"schedule supplies {len(schedule)} rounds, need {T}")
    n = graph.num_vertices
    q = mu0.q
    wanted = set(int(c) for c in checkpoints)
    bad = [c for c in wanted if c < 0 or c > T]
    if bad:
        raise ValueError(f"checkpoints outside 0..{T}: {sorted(bad)}")
    rng_act, rng_samp = _substreams(seed)
    X = mu0.sample_profiles(rng_samp, replicas)
    out: dict[int, np.ndarray] = {}
    if 0 in wanted:
        out[0] = X.copy()
    F = RunningAvgCost.initial(graph, q)
    for t in range(1, T + 1):
        kernel = GlauberKernel(graph, mu0, beta, F)
        activated = rng_act.integers(n, size=replicas)
        u = rng_samp.random(replicas)
        for v in range(n):
            mask = activated == v
            if not mask.any():
                continue
            deg = graph.degree(v)
            table = kernel.conditional_table(v)
            if deg:
                bidx = X[mask][:, kernel._adj[v]] @ kernel._boundary_strides(v)
                probs = table[bidx]
            else:
                probs = np.broadcast_to(table[0], (int(mask.sum()), q))
            cdf = np.cumsum(probs, axis=1)
            ge = cdf >= u[mask][:, None]
            a = np.where(ge.any(axis=1), ge.argmax(axis=1), q - 1)
            X[mask, v] = a
        F = update_running_average(F, schedule[t - 1])
        if t in wanted:
            out[t] = X.copy()
    return out


def empirical_profile_dist(states: np.ndarray, q: int) -> Dist:
    """Empirical distribution of profile rows over the full space."""
    n = states.shape[1]
    size = q**n
    idx = states @ profile_strides(n, q)
    counts = np.bincount(idx, minlength=size).astype(float)
    return Dist(counts / counts.sum())


# ---------------------------------------------------------------------------
# Exact evolution and regret
# ---------------------------------------------------------------------------


def evolve_exact(mu0: DefaultMeasure, schedule: Sequence[NetworkCost], beta: float,
                 T: int, graph: NetworkGraph, cap: int = DENSE_CAP_DEFAULT) -> list[Dist]:
    """Exact profile distributions [mu_0, mu_1, ..., mu_T] under the dynamics."""
    if T > len(schedule):
        raise ValueError(f"schedule supplies {len(schedule)} rounds, need {T}")
    check_dense_cap(graph.num_vertices, mu0.q, cap)
    dists = [product_dist(mu0, cap)]
    F = RunningAvgCost.initial(graph, mu0.q)
    for t in range(1, T + 1):
        kernel = GlauberKernel(graph, mu0, beta, F)
        dists.append(kernel.apply(dists[-1], cap))
        F = update_running_average(F, schedule[t - 1])
    return dists


def decentralized_regret(schedule: Sequence[NetworkCost], mu0: DefaultMeasure,
                         beta: float, graph: NetworkGraph,
                         cap: int = DENSE_CAP_DEFAULT,
                         bound_fn=None) -> RegretLedger:
    """Exact regret trajectory of the decentralized dynamics.

    Requires a desk-scale profile space: the losses need the exact profile
    distribution and its divergence from the default measure.  Above the cap,
    use :meth:`SamplePath.cumulative_realized_cost` as a sample-path proxy.
    """
    n = graph.num_vertices
    try:
        check_dense_cap(n, mu0.q, cap)
    except CapExceededError as exc:
        raise CapExceededError(
            str(exc) + "; exact decentralized losses are unavailable, track "
            "SamplePath.cumulative_realized_cost() instead"
        ) from None
    T = len(schedule)
    mu0_dist = product_dist(mu0, cap)
    dists = evolve_exact(mu0, schedule, beta, T, graph, cap)
    losses = np.empty(T)
    for t in range(1, T + 1):
        fv = evaluate_cost_dense(schedule[t - 1], graph, cap=cap)
        losses[t - 1] = loss_value(dists[t], fv, beta, mu0_dist)
    comparator = comparator_prefix_values(schedule, mu0, beta, graph, cap)
    cumulative = np.cumsum(losses) - comparator
    if bound_fn is None:
        bounds = np.full(T, np.nan)
    else:
        bounds = np.array([bound_fn(t) for t in range(1, T + 1)])
    return RegretLedger(losses, comparator, cumulative, bounds)
