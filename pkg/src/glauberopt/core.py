"""Network graphs, action profiles, default measures, and decomposable costs.

Conventions used throughout the package:

* Vertices are 0-indexed in memory.  Graph files, schedule files, and all
  CLI input/output use 1-indexed vertex ids.
* Base actions are 0-indexed in memory ({0..q-1}) and 1-indexed in files.
* A network action profile is a plain ``np.ndarray`` of shape ``(n,)`` with
  integer entries in ``{0..q-1}``.
* The full profile space has ``q**n`` states enumerated in C order (vertex 0
  is the most significant digit), matching ``itertools.product``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: Largest profile space materialized densely (distributions, kernels).
DENSE_CAP_DEFAULT = 65536

#: Absolute slack when validating cost entries against [-1, 1].  Running
#: averages are convex combinations and may overshoot by a few ulps.
_COST_ATOL = 1e-12


class CapExceededError(ValueError):
    """A dense computation was requested on a profile space above its cap."""


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkGraph:
    """Simple undirected interaction graph.

    ``edges`` holds canonical ``(min, max)`` pairs in sorted order and
    ``adjacency[v]`` lists the neighbors of ``v`` in increasing order.
    """

    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    max_degree: int

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edge_index(self, u: int, v: int) -> int:
        """Position of edge {u, v} in ``edges``; raises if absent."""
        key = (u, v) if u < v else (v, u)
        try:
            return self._edge_lookup[key]
        except KeyError:
            raise ValueError(f"no edge {{{u}, {v}}} in graph") from None

    @property
    def _edge_lookup(self) -> dict[tuple[int, int], int]:
        lookup = self.__dict__.get("_edge_lookup_cache")
        if lookup is None:
            lookup = {e: i for i, e in enumerate(self.edges)}
            object.__setattr__(self, "_edge_lookup_cache", lookup)
        return lookup

    def canonical_text(self) -> str:
        """1-indexed textual form; stable input to :meth:`graph_hash`."""
        lines = [str(self.num_vertices)]
        lines += [f"{u + 1} {v + 1}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    def graph_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def build_graph(num_vertices: int, edge_list) -> NetworkGraph:
    """Build a :class:`NetworkGraph` from 1-indexed vertex pairs.

    Rejects self-loops, duplicate edges (in either orientation), and
    out-of-range vertex ids.
    """
    if num_vertices < 1:
        raise ValueError("graph needs at least one vertex")
    seen: set[tuple[int, int]] = set()
    canonical = []
    for u1, v1 in edge_list:
        if not (1 <= u1 <= num_vertices and 1 <= v1 <= num_vertices):
            raise ValueError(f"edge ({u1}, {v1}) references a vertex outside 1..{num_vertices}")
        if u1 == v1:
            raise ValueError(f"self-loop at vertex {u1}")
        u, v = u1 - 1, v1 - 1
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise ValueError(f"duplicate edge ({u1}, {v1})")
        seen.add(key)
        canonical.append(key)
    canonical.sort()
    neighbors: list[list[int]] = [[] for _ in range(num_vertices)]
    for u, v in canonical:
        neighbors[u].append(v)
        neighbors[v].append(u)
    adjacency = tuple(tuple(sorted(ns)) for ns in neighbors)
    max_degree = max((len(ns) for ns in adjacency), default=0)
    return NetworkGraph(num_vertices, tuple(canonical), adjacency, max_degree)


def load_graph_file(path) -> NetworkGraph:
    """Parse the plain-text graph format: first line ``|V|``, then one
    1-indexed ``u v`` pair per line."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = [ln.strip() for ln in fh]
    lines = [ln for ln in raw if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty graph file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ValueError(f"{path}: first line must be the vertex count, got {lines[0]!r}") from None
    pairs = []
    for ln_no, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: line {ln_no}: expected 'u v', got {ln!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    return build_graph(n, pairs)


# ---------------------------------------------------------------------------
# Profile space
# ---------------------------------------------------------------------------


def num_profiles(n: int, q: int) -> int:
    return q**n


def check_dense_cap(n: int, q: int, cap: int = DENSE_CAP_DEFAULT) -> int:
    size = num_profiles(n, q)
    if size > cap:
        raise CapExceededError(
            f"profile space has {size} states, exceeding the dense cap {cap}; "
            "raise the cap explicitly if memory allows"
        )
    return size


@lru_cache(maxsize=32)
def profile_space(n: int, q: int, cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """All profiles as an ``(q**n, n)`` int array in C order (read-only)."""
    size = check_dense_cap(n, q, cap)
    idx = np.arange(size)
    strides = q ** np.arange(n - 1, -1, -1)
    table = (idx[:, None] // strides[None, :]) % q
    table = table.astype(np.int64)
    table.setflags(write=False)
    return table


def profile_strides(n: int, q: int) -> np.ndarray:
    return q ** np.arange(n - 1, -1, -1)


def profile_index(x: np.ndarray, q: int) -> int:
    """Index of a profile in the C-order enumeration."""
    x = np.asarray(x)
    return int(x @ profile_strides(len(x), q))


def validate_profile(x: np.ndarray, n: int, q: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (n,):
        raise ValueError(f"profile must have shape ({n},), got {x.shape}")
    if np.any(x < 0) or np.any(x >= q):
        raise ValueError(f"profile entries must lie in 0..{q - 1}")
    return x


@lru_cache(maxsize=8)
def hamming_matrix(n: int, q: int, cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """Pairwise Hamming distances over the full profile space (read-only)."""
    table = profile_space(n, q, cap)
    size = table.shape[0]
    out = np.zeros((size, size), dtype=np.int8 if n < 128 else np.int16)
    for v in range(n):
        col = table[:, v]
        out += col[:, None] != col[None, :]
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# Default measure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DefaultMeasure:
    """Product of per-agent status-quo distributions over {0..q-1}.

    Every entry must be strictly positive; rows are renormalized when within
    1e-9 of unit mass and rejected otherwise.
    """

    per_vertex: np.ndarray  # (n, q)

    def __post_init__(self):
        pv = np.asarray(self.per_vertex, dtype=float)
        if pv.ndim != 2:
            raise ValueError("per_vertex must be a (num_vertices, q) matrix")
        if np.any(pv <= 0):
            raise ValueError("default measure must charge every action (strictly positive entries)")
        sums = pv.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise ValueError("default measure rows must sum to 1 within 1e-9")
        pv = pv / sums[:, None]
        pv.setflags(write=False)
        object.__setattr__(self, "per_vertex", pv)

    @classmethod
    def uniform(cls, n: int, q: int) -> "DefaultMeasure":
        return cls(np.full((n, q), 1.0 / q))

    @property
    def num_vertices(self) -> int:
        return self.per_vertex.shape[0]

    @property
    def q(self) -> int:
        return self.per_vertex.shape[1]

    @property
    def theta_d(self) -> float:
        """Smallest per-agent action probability."""
        return float(self.per_vertex.min())

    @property
    def theta(self) -> float:
        """Smallest profile probability of the product measure."""
        return float(np.prod(self.per_vertex.min(axis=1)))

    def log_profile_weights(self, profiles: np.ndarray) -> np.ndarray:
        """log mu_0(x) for each row x of ``profiles``."""
        logs = np.log(self.per_vertex)
        n = self.num_vertices
        return sum(logs[v, profiles[:, v]] for v in range(n))

    def profile_probs(self, cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
        table = profile_space(self.num_vertices, self.q, cap)
        return np.exp(self.log_profile_weights(table))

    def sample_profiles(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` profiles with independent coordinates."""
        n, q = self.per_vertex.shape
        u = rng.random((count, n))
        cdf = np.cumsum(self.per_vertex, axis=1)
        out = np.empty((count, n), dtype=np.int64)
        for v in range(n):
            out[:, v] = np.searchsorted(cdf[v], u[:, v], side="left")
        return np.minimum(out, q - 1)


def load_default_measure_file(path, n: int, q: int) -> DefaultMeasure:
    """Parse a per-vertex default measure: one line of q probabilities per vertex."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln_no, ln in enumerate(fh, start=1):
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            parts = ln.split()
            if len(parts) != q:
                raise ValueError(f"{path}: line {ln_no}: expected {q} probabilities, got {len(parts)}")
            rows.append([float(p) for p in parts])
    if len(rows) != n:
        raise ValueError(f"{path}: expected {n} vertex rows, got {len(rows)}")
    return DefaultMeasure(np.array(rows))


# ---------------------------------------------------------------------------
# Decomposable costs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkCost:
    """Cost decomposed into per-vertex terms and per-edge interaction terms.

    ``vertex_costs[v, a]`` is the individual cost of action ``a`` at vertex
    ``v``; ``edge_costs[i, a, b]`` is the interaction cost of edge
    ``graph.edges[i] = (u, v)`` (u < v) with ``a`` the action of ``u`` and
    ``b`` the action of ``v``.  All entries must lie in [-1, 1]; out-of-range
    input is rejected rather than clamped.
    """

    vertex_costs: np.ndarray  # (n, q)
    edge_costs: np.ndarray    # (num_edges, q, q)

    def __post_init__(self):
        vc = np.asarray(self.vertex_costs, dtype=float)
        ec = np.asarray(self.edge_costs, dtype=float)
        if vc.ndim != 2:
            raise ValueError("vertex_costs must be a (num_vertices, q) matrix")
        q = vc.shape[1]
        if ec.ndim != 3 or ec.shape[1:] != (q, q):
            raise ValueError(f"edge_costs must have shape (num_edges, {q}, {q})")
        for name, arr in (("vertex", vc), ("edge", ec)):
            if arr.size and (not np.all(np.isfinite(arr)) or np.max(np.abs(arr)) > 1.0 + _COST_ATOL):
                raise ValueError(f"{name} cost entries must lie in [-1, 1]")
        vc.setflags(write=False)
        ec.setflags(write=False)
        object.__setattr__(self, "vertex_costs", vc)
        object.__setattr__(self, "edge_costs", ec)

    @classmethod
    def zeros(cls, graph: NetworkGraph, q: int) -> "NetworkCost":
        return cls(np.zeros((graph.num_vertices, q)), np.zeros((graph.num_edges, q, q)))

    @property
    def q(self) -> int:
        return self.vertex_costs.shape[1]

    @property
    def num_vertices(self) -> int:
        return self.vertex_costs.shape[0]

    def edge_value(self, graph: NetworkGraph, u: int, v: int, a_u: int, a_v: int) -> float:
        """Interaction cost of edge {u, v}; argument order follows (u, v)."""
        i = graph.edge_index(u, v)
        if u < v:
            return float(self.edge_costs[i, a_u, a_v])
        return float(self.edge_costs[i, a_v, a_u])


def check_cost_shape(f: NetworkCost, graph: NetworkGraph) -> None:
    if f.num_vertices != graph.num_vertices or f.edge_costs.shape[0] != graph.num_edges:
        raise ValueError(
            f"cost shaped for {f.num_vertices} vertices / {f.edge_costs.shape[0]} edges, "
            f"graph has {graph.num_vertices} / {graph.num_edges}"
        )


def evaluate_cost(f: NetworkCost, x: np.ndarray, graph: NetworkGraph) -> float:
    """Total network cost of profile ``x``."""
    check_cost_shape(f, graph)
    x = validate_profile(x, graph.num_vertices, f.q)
    total = float(f.vertex_costs[np.arange(graph.num_vertices), x].sum())
    for i, (u, v) in enumerate(graph.edges):
        total += f.edge_costs[i, x[u], x[v]]
    return float(total)


def evaluate_cost_dense(f: NetworkCost, graph: NetworkGraph,
                        profiles: np.ndarray | None = None,
                        cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """Vector of f(x) over the full profile space (or the given rows)."""
    check_cost_shape(f, graph)
    if profiles is None:
        profiles = profile_space(graph.num_vertices, f.q, cap)
    out = np.zeros(profiles.shape[0])
    for v in range(graph.num_vertices):
        out += f.vertex_costs[v, profiles[:, v]]
    for i, (u, v) in enumerate(graph.edges):
        out += f.edge_costs[i, profiles[:, u], profiles[:, v]]
    return out


def local_cost(f: NetworkCost, v: int, a: int, boundary: np.ndarray,
               graph: NetworkGraph) -> float:
    """Cost seen locally at vertex ``v`` playing ``a`` against its boundary.

    ``boundary`` lists the actions of ``graph.adjacency[v]`` in that order.
    """
    return float(local_cost_vector(f, v, boundary, graph)[a])


def local_cost_vector(f: NetworkCost, v: int, boundary: np.ndarray,
                      graph: NetworkGraph) -> np.ndarray:
    """Local cost at ``v`` as a length-q vector over the vertex's actions."""
    check_cost_shape(f, graph)
    nbrs = graph.adjacency[v]
    boundary = np.asarray(boundary, dtype=np.int64)
    if boundary.shape != (len(nbrs),):
        raise ValueError(f"boundary must cover the {len(nbrs)} neighbors of vertex {v}")
    if boundary.size and (boundary.min() < 0 or boundary.max() >= f.q):
        raise ValueError(f"boundary actions must lie in 0..{f.q - 1}")
    out = f.vertex_costs[v].astype(float).copy()
    for u, a_u in zip(nbrs, boundary):
        i = graph.edge_index(u, v)
        if u < v:
            out += f.edge_costs[i, a_u, :]
        else:
            out += f.edge_costs[i, :, a_u]
    return out


# ---------------------------------------------------------------------------
# Running averages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunningAvgCost:
    """Uniformly weighted average of the first ``t`` costs, scaled by 1/(t+1).

    The round-0 average is identically zero; after round t the components
    hold (1/(t+1)) * sum of the first t costs, so values stay in [-1, 1].
    """

    t: int
    avg: NetworkCost

    @classmethod
    def initial(cls, graph: NetworkGraph, q: int) -> "RunningAvgCost":
        return cls(0, NetworkCost.zeros(graph, q))


def update_running_average(F_prev: RunningAvgCost, f_t: NetworkCost) -> RunningAvgCost:
    """Fold the next round's cost into the running average.

    Uses the recursion avg_t = (t/(t+1)) * avg_{t-1} + f_t/(t+1), which
    agrees with recomputing the batch average from scratch to ~1e-16 per
    component.
    """
    t_prev = F_prev.t
    if t_prev < 0:
        raise ValueError("running average round index must be nonnegative")
    t = t_prev + 1
    w_old = t / (t + 1.0)
    vc = F_prev.avg.vertex_costs * w_old + f_t.vertex_costs / (t + 1.0)
    ec = F_prev.avg.edge_costs * w_old + f_t.edge_costs / (t + 1.0)
    return RunningAvgCost(t, NetworkCost(vc, ec))
