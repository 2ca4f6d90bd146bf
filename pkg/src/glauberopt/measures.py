"""Finite distributions: Gibbs reweighting, divergences, couplings, exact W1.

All Gibbs normalization happens in the log domain with a max shift so that
large energies (beta times a network cost can reach hundreds on stress
instances) never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .core import (
    CapExceededError,
    DefaultMeasure,
    NetworkGraph,
    hamming_matrix,
    num_profiles,
)

#: Largest profile space for which the exact transportation problem is solved.
OT_CAP_DEFAULT = 256

_SUM_ATOL = 1e-9  # construction-time renormalization window


class Dist:
    """Dense probability vector with a cached log-domain representation."""

    __slots__ = ("p", "logp")

    def __init__(self, probs, logp: np.ndarray | None = None):
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("distribution must be a nonempty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and nonnegative")
        total = p.sum()
        if abs(total - 1.0) > _SUM_ATOL:
            raise ValueError(f"probabilities sum to {total!r}, farther than {_SUM_ATOL} from 1")
        p = p / total
        p.setflags(write=False)
        self.p = p
        if logp is None:
            with np.errstate(divide="ignore"):
                logp = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), -np.inf)
        logp.setflags(write=False)
        self.logp = logp

    @classmethod
    def from_logits(cls, logits) -> "Dist":
        """Normalize unnormalized log weights (log-sum-exp with max shift)."""
        lw = np.asarray(logits, dtype=float)
        if not np.all(lw < np.inf):
            raise ValueError("logits must be < +inf")
        m = lw.max()
        if not np.isfinite(m):
            raise ValueError("logits must contain at least one finite entry")
        shifted = lw - m
        w = np.exp(shifted)
        total = w.sum()
        logp = shifted - np.log(total)
        return cls(w / total, logp=logp)

    @classmethod
    def uniform(cls, size: int) -> "Dist":
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def point_mass(cls, size: int, index: int) -> "Dist":
        p = np.zeros(size)
        p[index] = 1.0
        return cls(p)

    @property
    def support_size(self) -> int:
        return self.p.size

    def __len__(self) -> int:
        return self.p.size

    def __repr__(self) -> str:
        return f"Dist(size={self.p.size})"


def product_dist(mu0: DefaultMeasure, cap: int | None = None) -> Dist:
    """Materialize the product default measure over the full profile space."""
    from .core import DENSE_CAP_DEFAULT, profile_space

    cap = DENSE_CAP_DEFAULT if cap is None else cap
    table = profile_space(mu0.num_vertices, mu0.q, cap)
    logw = mu0.log_profile_weights(table)
    return Dist.from_logits(logw)


# ---------------------------------------------------------------------------
# Gibbs reweighting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GibbsSpec:
    """A base measure tilted by a negative-energy vector, with its log
    normalization constant."""

    base: Dist
    neg_energy: np.ndarray
    log_partition: float
    dist: Dist


def log_partition(base: Dist, neg_energy) -> float:
    """ln <base, exp(neg_energy)>, computed stably."""
    g = np.asarray(neg_energy, dtype=float)
    logw = base.logp + g
    m = logw.max()
    if not np.isfinite(m):
        raise ValueError("negative energy must be finite on the support")
    return float(m + np.log(np.exp(logw - m).sum()))


def gibbs(base: Dist, neg_energy) -> Dist:
    """Reweight ``base`` by ``exp(neg_energy)`` and renormalize."""
    g = np.asarray(neg_energy, dtype=float)
    if g.shape != base.p.shape:
        raise ValueError("negative energy must match the support size")
    if not np.all(np.isfinite(g)):
        raise ValueError("negative energy must be finite")
    return Dist.from_logits(base.logp + g)


def gibbs_spec(base: Dist, neg_energy) -> GibbsSpec:
    g = np.asarray(neg_energy, dtype=float)
    return GibbsSpec(base, g, log_partition(base, g), gibbs(base, g))


# ---------------------------------------------------------------------------
# Divergences and related functionals
# ---------------------------------------------------------------------------


def kl_divergence(mu: Dist, nu: Dist) -> float:
    """Relative entropy D(mu || nu); +inf when supp(mu) is not within supp(nu)."""
    if len(mu) != len(nu):
        raise ValueError("distributions must share a support size")
    mask = mu.p > 0
    if np.any(nu.p[mask] == 0):
        return float("inf")
    val = float(np.sum(mu.p[mask] * (mu.logp[mask] - nu.logp[mask])))
    return max(val, 0.0)


def tv_distance(mu: Dist, nu: Dist) -> float:
    if len(mu) != len(nu):
        raise ValueError("distributions must share a support size")
    return 0.5 * float(np.abs(mu.p - nu.p).sum())


def shannon_entropy(mu: Dist) -> float:
    mask = mu.p > 0
    return max(0.0, -float(np.sum(mu.p[mask] * mu.logp[mask])))


def span_seminorm(values) -> float:
    """Oscillation max(v) - min(v) of a finite vector."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("span seminorm of an empty vector is undefined")
    return float(v.max() - v.min())


def hamming(x, y) -> int:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError("profiles must have equal length")
    return int(np.count_nonzero(x != y))


# ---------------------------------------------------------------------------
# Couplings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Coupling:
    """Joint distribution on a product of two finite supports."""

    joint: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.joint, dtype=float)
        if j.ndim != 2:
            raise ValueError("coupling must be a matrix")
        if np.any(j < -1e-15):
            raise ValueError("coupling entries must be nonnegative")
        j = np.maximum(j, 0.0)
        if abs(j.sum() - 1.0) > _SUM_ATOL:
            raise ValueError("coupling mass must be 1")
        j.setflags(write=False)
        object.__setattr__(self, "joint", j)

    @property
    def row_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def col_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    def mismatch_probability(self) -> float:
        """Pr[X != Y] under the coupling (square supports only)."""
        return 1.0 - float(np.trace(self.joint))


def coupling_marginal_error(c: Coupling, mu: Dist, nu: Dist) -> float:
    return max(
        float(np.abs(c.row_marginal - mu.p).max()),
        float(np.abs(c.col_marginal - nu.p).max()),
    )


def transport_cost(c: Coupling, cost_matrix: np.ndarray) -> float:
    return float(np.sum(c.joint * cost_matrix))


def optimal_tv_coupling(mu: Dist, nu: Dist) -> Coupling:
    """The standard overlap coupling: Pr[X != Y] equals the TV distance.

    Shared mass min(mu, nu) sits on the diagonal; the residuals are coupled
    by their normalized outer product.
    """
    if len(mu) != len(nu):
        raise ValueError("distributions must share a support size")
    overlap = np.minimum(mu.p, nu.p)
    joint = np.diag(overlap)
    residual = float(mu.p.sum() - overlap.sum())
    if residual > 0:
        r_mu = mu.p - overlap
        r_nu = nu.p - overlap
        joint = joint + np.outer(r_mu, r_nu) / residual
    return Coupling(joint)


# ---------------------------------------------------------------------------
# Exact Wasserstein-1
# ---------------------------------------------------------------------------


def exact_transport_cost(p: np.ndarray, r: np.ndarray, cost_matrix: np.ndarray) -> float:
    """Optimal value of the dense transportation problem (exact LP solve).

    Supports are reduced to the atoms with positive mass before handing the
    instance to the HiGHS simplex.
    """
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.array_equal(p, r):
        return 0.0
    si = np.nonzero(p > 0)[0]
    sj = np.nonzero(r > 0)[0]
    mu_s = p[si]
    nu_s = r[sj]
    C = np.asarray(cost_matrix, dtype=float)[np.ix_(si, sj)]
    m, n = C.shape
    if m == 1 or n == 1:
        # all mass forced through the single atom
        return float((np.outer(mu_s, nu_s) * C).sum())
    row_eq = np.zeros((m, m * n))
    for i in range(m):
        row_eq[i, i * n:(i + 1) * n] = 1.0
    col_eq = np.zeros((n - 1, m * n))
    for j in range(n - 1):
        col_eq[j, j::n] = 1.0
    # one column constraint dropped: it is implied by the others
    A_eq = np.vstack([row_eq, col_eq])
    b_eq = np.concatenate([mu_s, nu_s[:-1]])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transportation solve failed: {res.message}")
    return max(0.0, float(res.fun))


def wasserstein1_hamming(mu: Dist, nu: Dist, graph: NetworkGraph, q: int,
                         cap: int = OT_CAP_DEFAULT) -> float:
    """Exact W1 between profile distributions under the Hamming ground metric.

    Raises :class:`CapExceededError` above the exact-OT cap; callers that
    only need an upper bound can fall back to
    ``graph.num_vertices * tv_distance(mu, nu)``.
    """
    n = graph.num_vertices
    size = num_profiles(n, q)
    if len(mu) != size or len(nu) != size:
        raise ValueError(f"distributions must live on the {size}-state profile space")
    if size > cap:
        raise CapExceededError(
            f"profile space has {size} states, exceeding the exact-OT cap {cap}; "
            "use num_vertices * tv_distance(mu, nu) as an upper bound instead"
        )
    H = hamming_matrix(n, q, max(cap, size))
    return exact_transport_cost(mu.p, nu.p, H)
