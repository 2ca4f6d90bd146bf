"""Experiment driver shared by the CLI and the test harness: configuration,
the per-round metrics table, Monte Carlo replica runs, and file emission.

The CSV files are the stable machine contract ('.' decimal point, '\\n' line
endings, shortest round-trip float formatting); figures are a convenience
layered on top of them.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .centralized import centralized_regret_bound
from .core import (
    DENSE_CAP_DEFAULT,
    CapExceededError,
    DefaultMeasure,
    NetworkGraph,
    load_default_measure_file,
    load_graph_file,
    num_profiles,
)
from .glauber import empirical_profile_dist, simulate_path, simulate_replicas
from .measures import OT_CAP_DEFAULT, tv_distance, wasserstein1_hamming
from .schedules import CostSchedule, schedule_from_spec
from .theory import (
    InstanceRun,
    TheoryConstants,
    check_suite,
    curvature_floor,
    decentralized_regret_bound,
    invariant_shift_bound,
    run_instance,
    theory_constants,
    tv_tracking_curve,
    w1_tracking_curve,
)

WORKERS_ENV_VAR = "GLAUBEROPT_WORKERS"

#: Per-round metrics table header, in emission order.
METRIC_COLUMNS = (
    "t",
    "loss_centralized",
    "loss_decentralized",
    "cum_regret_centralized",
    "cum_regret_LI",
    "bound_eq12",
    "bound_thm1",
    "w1_mu_pi",
    "tv_mu_pi",
    "kl_step_centralized",
    "kappa_star",
    "delta_t",
)

MONTECARLO_CHECKPOINTS = (5, 20, 50)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}") from None
    return max(1, value)


@dataclass
class ExperimentConfig:
    """Batch-run configuration; precedence is CLI flag > file > default."""

    graph_path: str
    q: int
    beta: float
    T: int
    mu0: str = "uniform"          # "uniform" or a per-vertex probabilities file
    mode: str = "exact"           # "exact" | "montecarlo"
    replicas: int = 10**5
    seed: int = 0
    schedule: dict = field(default_factory=dict)  # {"path": ...} or generator spec
    output_dir: str = "out"
    dense_cap: int = DENSE_CAP_DEFAULT
    ot_cap: int = OT_CAP_DEFAULT
    allow_large_caps: bool = False
    workers: int = 0              # 0: take the env default
    plots: bool = True

    def validate(self) -> None:
        if self.mode not in ("exact", "montecarlo"):
            raise ConfigError(f"mode must be 'exact' or 'montecarlo', got {self.mode!r}")
        if self.q < 2:
            raise ConfigError("q must be at least 2")
        if self.T < 1:
            raise ConfigError("T must be at least 1")
        if self.beta < 0:
            raise ConfigError("beta must be nonnegative")
        if self.mode == "montecarlo" and self.replicas < 1:
            raise ConfigError("montecarlo mode needs replicas >= 1")
        if not self.schedule:
            raise ConfigError("a schedule path or generator spec is required")
        if not self.allow_large_caps:
            if self.dense_cap > DENSE_CAP_DEFAULT:
                raise ConfigError(
                    f"dense_cap {self.dense_cap} above the default {DENSE_CAP_DEFAULT} "
                    "requires allow_large_caps (memory grows linearly)"
                )
            if self.ot_cap > OT_CAP_DEFAULT:
                raise ConfigError(
                    f"ot_cap {self.ot_cap} above the default {OT_CAP_DEFAULT} "
                    "requires allow_large_caps (memory grows quadratically)"
                )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {sorted(unknown)}")
        required = {"graph_path", "q", "beta", "T"}
        missing = required - set(doc)
        if missing:
            raise ConfigError(f"{path}: missing config keys: {sorted(missing)}")
        return cls(**doc)

    def resolve_instance(self) -> tuple[NetworkGraph, DefaultMeasure, CostSchedule]:
        graph = load_graph_file(self.graph_path)
        if self.mu0 == "uniform":
            mu0 = DefaultMeasure.uniform(graph.num_vertices, self.q)
        else:
            mu0 = load_default_measure_file(self.mu0, graph.num_vertices, self.q)
        spec = dict(self.schedule)
        spec.setdefault("T", self.T)
        spec.setdefault("seed", self.seed)
        schedule = schedule_from_spec(graph, self.q, spec)
        if schedule.horizon < self.T:
            raise ConfigError(
                f"schedule supplies {schedule.horizon} rounds, config requests T={self.T}"
            )
        return graph, mu0, schedule


# ---------------------------------------------------------------------------
# Exact-mode metrics
# ---------------------------------------------------------------------------


@dataclass
class ExactMetrics:
    """Per-round table plus the run it came from."""

    run: InstanceRun
    constants: TheoryConstants | None   # None when the regularity condition fails
    bound_centralized: np.ndarray       # (T,)
    bound_decentralized: np.ndarray | None
    w1_mu_pi: np.ndarray | None         # None above the exact-OT cap
    tv_mu_pi: np.ndarray
    kl_step: np.ndarray
    shift_bounds: np.ndarray | None

    @property
    def T(self) -> int:
        return self.run.T

    def rows(self):
        """Yield per-round CSV rows; non-applicable cells are empty."""
        run = self.run
        cum_c = run.cum_regret_centralized
        cum_d = run.cum_regret_decentralized
        kappa = self.constants.kappa_star if self.constants else None
        for t in range(1, self.T + 1):
            i = t - 1
            yield (
                t,
                run.losses_centralized[i],
                run.losses_decentralized[i],
                cum_c[i],
                cum_d[i],
                self.bound_centralized[i],
                self.bound_decentralized[i] if self.bound_decentralized is not None else None,
                self.w1_mu_pi[i] if self.w1_mu_pi is not None else None,
                self.tv_mu_pi[i],
                self.kl_step[i],
                kappa,
                self.shift_bounds[i] if self.shift_bounds is not None else None,
            )


def compute_exact_metrics(graph: NetworkGraph, q: int, mu0: DefaultMeasure,
                          beta: float, schedule, T: int,
                          dense_cap: int = DENSE_CAP_DEFAULT,
                          ot_cap: int = OT_CAP_DEFAULT) -> ExactMetrics:
    run = run_instance(graph, q, mu0, beta, schedule, T, dense_cap)
    T = run.T
    from .measures import kl_divergence

    bound_c = np.array([
        centralized_regret_bound(beta, graph, mu0.theta_d, t) for t in range(1, T + 1)
    ])
    regular = graph.max_degree * beta < 1.0
    constants = theory_constants(graph, q, mu0, beta) if regular else None
    if regular:
        bound_d = np.array([
            decentralized_regret_bound(constants, graph, q, beta, t)
            for t in range(1, T + 1)
        ])
        shifts = np.array([
            invariant_shift_bound(beta, graph.num_vertices, graph.max_degree, t)
            for t in range(1, T + 1)
        ])
    else:
        bound_d = None
        shifts = None
    try:
        w1 = w1_tracking_curve(run, ot_cap)
    except CapExceededError:
        w1 = None
    tv = tv_tracking_curve(run)
    kl_step = np.array([
        kl_divergence(run.pis[t - 1], run.pis[t]) for t in range(1, T + 1)
    ])
    return ExactMetrics(run, constants, bound_c, bound_d, w1, tv, kl_step, shifts)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return ""
    return repr(v)


def write_metrics_csv(metrics: ExactMetrics, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(METRIC_COLUMNS) + "\n")
        for row in metrics.rows():
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def exact_summary(metrics: ExactMetrics, config: ExperimentConfig | None = None) -> dict:
    run = metrics.run
    cum_c = run.cum_regret_centralized
    cum_d = run.cum_regret_decentralized
    dominated_c = bool(np.all(cum_c <= metrics.bound_centralized + 1e-9))
    if metrics.bound_decentralized is not None:
        dominated_d = bool(np.all(cum_d <= metrics.bound_decentralized + 1e-9))
    else:
        dominated_d = None
    summary = {
        "mode": "exact",
        "T": run.T,
        "num_vertices": run.graph.num_vertices,
        "max_degree": run.graph.max_degree,
        "q": run.q,
        "beta": run.beta,
        "graph_hash": run.graph.graph_hash(),
        "final_regret_centralized": float(cum_c[-1]),
        "final_regret_decentralized": float(cum_d[-1]),
        "final_bound_centralized": float(metrics.bound_centralized[-1]),
        "final_bound_decentralized": (
            float(metrics.bound_decentralized[-1])
            if metrics.bound_decentralized is not None else None
        ),
        "centralized_regret_dominated": dominated_c,
        "decentralized_regret_dominated": dominated_d,
        "regularity_satisfied": metrics.constants is not None,
        "constants": dataclasses.asdict(metrics.constants) if metrics.constants else None,
    }
    if config is not None:
        summary["config"] = dataclasses.asdict(config)
    return summary


# ---------------------------------------------------------------------------
# Monte Carlo mode
# ---------------------------------------------------------------------------


def _replica_chunk(args):
    schedule, mu0, beta, chunk_seed, T, graph, count, checkpoints = args
    return simulate_replicas(schedule, mu0, beta, chunk_seed, T, graph, count, checkpoints)


def run_replicas_parallel(schedule, mu0: DefaultMeasure, beta: float, seed: int,
                          T: int, graph: NetworkGraph, replicas: int,
                          checkpoints, workers: int = 1) -> dict[int, np.ndarray]:
    """Replica fan-out over a process pool; chunk seeding depends only on
    (seed, workers, replicas), so a fixed configuration is reproducible."""
    workers = max(1, workers)
    chunk_sizes = [replicas // workers] * workers
    for i in range(replicas % workers):
        chunk_sizes[i] += 1
    chunk_sizes = [c for c in chunk_sizes if c > 0]
    chunk_seeds = [int(s.generate_state(1)[0])
                   for s in np.random.SeedSequence(seed).spawn(len(chunk_sizes))]
    costs = tuple(schedule[i] for i in range(T))
    jobs = [(costs, mu0, beta, cs, T, graph, count, tuple(checkpoints))
            for cs, count in zip(chunk_seeds, chunk_sizes)]
    if len(jobs) == 1:
        results = [_replica_chunk(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replica_chunk, jobs))
    merged: dict[int, np.ndarray] = {}
    for c in checkpoints:
        merged[int(c)] = np.concatenate([r[int(c)] for r in results], axis=0)
    return merged


def write_trajectory_csv(path_obj, file_path) -> None:
    """Trajectory dump: one row per round with the activated agent (1-indexed),
    the full profile (1-indexed actions), and the realized cost."""
    n = path_obj.trajectory.shape[1]
    header = ["t", "u_t"] + [f"x_{v + 1}" for v in range(n)] + ["cost"]
    with open(file_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for t in range(1, path_obj.horizon + 1):
            profile = path_obj.trajectory[t]
            cells = [str(t), str(int(path_obj.activations[t - 1]) + 1)]
            cells += [str(int(a) + 1) for a in profile]
            cells.append(repr(float(path_obj.realized_costs[t - 1])))
            fh.write(",".join(cells) + "\n")


def montecarlo_summary(graph: NetworkGraph, q: int, mu0: DefaultMeasure, beta: float,
                       schedule, config: ExperimentConfig) -> tuple[dict, object]:
    """Run replica simulation plus one dumped trajectory; when the profile
    space is desk scale, report empirical-vs-exact gaps at the checkpoints."""
    T = config.T
    checkpoints = sorted({c for c in MONTECARLO_CHECKPOINTS if c <= T} | {T})
    workers = config.workers or default_workers()
    states = run_replicas_parallel(schedule, mu0, beta, config.seed, T, graph,
                                   config.replicas, checkpoints, workers)
    path_obj = simulate_path(schedule, mu0, beta, config.seed, T, graph)
    summary: dict = {
        "mode": "montecarlo",
        "T": T,
        "replicas": config.replicas,
        "seed": config.seed,
        "workers": workers,
        "checkpoints": checkpoints,
        "graph_hash": graph.graph_hash(),
        "final_cumulative_realized_cost": float(path_obj.cumulative_realized_cost()[-1]),
    }
    size = num_profiles(graph.num_vertices, q)
    exact_feasible = size <= config.dense_cap
    summary["exact_comparison_feasible"] = exact_feasible
    if exact_feasible:
        from .glauber import evolve_exact

        dists = evolve_exact(mu0, schedule, beta, T, graph, config.dense_cap)
        comparisons = {}
        for c in checkpoints:
            emp = empirical_profile_dist(states[c], q)
            entry = {"tv_empirical_vs_exact": tv_distance(emp, dists[c])}
            if size <= config.ot_cap:
                entry["w1_empirical_vs_exact"] = wasserstein1_hamming(
                    emp, dists[c], graph, q, config.ot_cap)
            comparisons[str(c)] = entry
        summary["checkpoint_comparisons"] = comparisons
    per_vertex = {}
    final_states = states[checkpoints[-1]]
    for v in range(graph.num_vertices):
        counts = np.bincount(final_states[:, v], minlength=q).astype(float)
        per_vertex[str(v + 1)] = (counts / counts.sum()).tolist()
    summary["empirical_marginals_at_T"] = per_vertex
    return summary, path_obj


# ---------------------------------------------------------------------------
# Entry points used by the CLI
# ---------------------------------------------------------------------------


def run_simulate(config: ExperimentConfig) -> dict:
    """Execute the configured experiment, write outputs, return the summary."""
    config.validate()
    graph, mu0, schedule = config.resolve_instance()
    size = num_profiles(graph.num_vertices, config.q)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if config.mode == "exact":
        if size > config.dense_cap:
            raise ConfigError(
                f"exact mode needs q^n = {size} within the dense cap {config.dense_cap}; "
                "use montecarlo mode or raise the cap with allow_large_caps"
            )
        metrics = compute_exact_metrics(graph, config.q, mu0, config.beta, schedule,
                                        config.T, config.dense_cap, config.ot_cap)
        write_metrics_csv(metrics, outdir / "metrics.csv")
        summary = exact_summary(metrics, config)
        if config.plots:
            from . import plots

            summary["figures"] = plots.render_simulation_figures(metrics, outdir)
    else:
        summary, path_obj = montecarlo_summary(graph, config.q, mu0, config.beta,
                                               schedule, config)
        summary["config"] = dataclasses.asdict(config)
        write_trajectory_csv(path_obj, outdir / "trajectory.csv")
    with open(outdir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def run_verify(config: ExperimentConfig, samples: int = 1000,
               kernel_t_max: int = 50) -> list:
    config.validate()
    graph, mu0, schedule = config.resolve_instance()
    return check_suite(graph, config.q, mu0, config.beta, schedule, config.T,
                       seed=config.seed, samples=samples, kernel_t_max=kernel_t_max,
                       cap=config.dense_cap, ot_cap=config.ot_cap)
