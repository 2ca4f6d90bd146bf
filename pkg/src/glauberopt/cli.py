"""Batch command-line interface.

Subcommands: simulate | verify | bounds | gen | oracle.  Exit codes: 0 on
success, 1 on usage or configuration errors, 2 when the verification suite
fails.  CSV output always uses '.' as the decimal separator.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .centralized import centralized_regret_bound
from .core import (
    CapExceededError,
    DefaultMeasure,
    load_default_measure_file,
    load_graph_file,
    num_profiles,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    default_workers,
    run_simulate,
    run_verify,
)
from .measures import Dist, product_dist
from .schedules import (
    ScheduleFormatError,
    generate_iid,
    generate_shocks,
    load_schedule,
    save_schedule,
)
from .theory import (
    RegularityError,
    decentralized_regret_bound,
    decay_polynomial_curve,
    suite_passed,
    theory_constants,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SUITE_FAILED = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1, not argparse's default 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="glauberopt",
                     description="Online discrete optimization on networks: "
                                 "simulation and bound certification.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an experiment and emit metrics",
                         parents=[], add_help=True)
    sim.add_argument("--config", help="JSON config file; flags override its values")
    _add_instance_args(sim)
    sim.add_argument("--mode", choices=["exact", "montecarlo"])
    sim.add_argument("--replicas", type=int)
    sim.add_argument("--output-dir")
    sim.add_argument("--dense-cap", type=int)
    sim.add_argument("--ot-cap", type=int)
    sim.add_argument("--allow-large-caps", action="store_true", default=None)
    sim.add_argument("--workers", type=int,
                     help=f"replica worker count (default from GLAUBEROPT_WORKERS)")
    plots = sim.add_mutually_exclusive_group()
    plots.add_argument("--plots", dest="plots", action="store_true", default=None)
    plots.add_argument("--no-plots", dest="plots", action="store_false")

    ver = sub.add_parser("verify", help="run the certification suite")
    ver.add_argument("--config")
    _add_instance_args(ver)
    ver.add_argument("--samples", type=int, default=1000,
                     help="random triples per inequality check")
    ver.add_argument("--kernel-t-max", type=int, default=50,
                     help="rounds of kernel-level checks (balance, curvature)")
    ver.add_argument("--output", help="write the JSON report here")

    bnd = sub.add_parser("bounds", help="print constants and bound curves")
    bnd.add_argument("--graph", help="graph file (or give --num-vertices/--max-degree)")
    bnd.add_argument("--num-vertices", type=int)
    bnd.add_argument("--max-degree", type=int)
    bnd.add_argument("--q", type=int, required=True)
    bnd.add_argument("--beta", type=float, required=True)
    bnd.add_argument("--T", type=int, required=True)
    bnd.add_argument("--theta-d", type=float,
                     help="smallest per-agent action probability (default 1/q, uniform)")
    bnd.add_argument("--output", help="write the CSV curves here instead of stdout")
    bnd.add_argument("--plots", action="store_true",
                     help="render bounds.png next to --output")

    gen = sub.add_parser("gen", help="generate and save a cost schedule")
    gen.add_argument("--generator", choices=["iid", "shocks"], required=True)
    gen.add_argument("--graph", required=True)
    gen.add_argument("--q", type=int, required=True)
    gen.add_argument("--T", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--amplitude", type=float, default=1.0)
    gen.add_argument("--epoch-mean", type=int, default=10)
    gen.add_argument("--out", required=True)

    orc = sub.add_parser("oracle", help="brute-force recompute one quantity")
    orc.add_argument("--quantity", required=True,
                     choices=["cost-at", "strategy-at", "comparator", "w1-pair"])
    orc.add_argument("--graph", required=True)
    orc.add_argument("--q", type=int, required=True)
    orc.add_argument("--beta", type=float, default=0.0)
    orc.add_argument("--schedule", required=True, help="schedule JSON file")
    orc.add_argument("--t", type=int, default=1, help="round index (1-indexed)")
    orc.add_argument("--profile", help="comma-separated 1-indexed actions, e.g. 1,2,1,1")
    orc.add_argument("--mu0", default="uniform")
    orc.add_argument("--seed", type=int, default=0)
    return parser


def _add_instance_args(p) -> None:
    p.add_argument("--graph", dest="graph_path")
    p.add_argument("--q", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--T", type=int)
    p.add_argument("--mu0", help="'uniform' or a per-vertex probabilities file")
    p.add_argument("--seed", type=int)
    p.add_argument("--schedule", help="schedule JSON file")
    p.add_argument("--generator", choices=["iid", "shocks"],
                   help="generate the schedule instead of loading one")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--epoch-mean", type=int)


def _config_from_args(args) -> ExperimentConfig:
    """Materialize a config with precedence CLI > file > defaults."""
    if args.config:
        config = ExperimentConfig.from_file(args.config)
    else:
        required = [name for name in ("graph_path", "q", "beta", "T")
                    if getattr(args, name, None) is None]
        if required:
            raise ConfigError(
                "without --config, these flags are required: "
                + ", ".join("--" + n.replace("_", "-").replace("-path", "") for n in required)
            )
        config = ExperimentConfig(graph_path=args.graph_path, q=args.q,
                                  beta=args.beta, T=args.T)
    for name in ("graph_path", "q", "beta", "T", "mu0", "mode", "replicas", "seed",
                 "output_dir", "dense_cap", "ot_cap", "allow_large_caps", "workers",
                 "plots"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    if getattr(args, "schedule", None):
        config.schedule = {"path": args.schedule}
    elif getattr(args, "generator", None):
        spec = {"generator": args.generator}
        if getattr(args, "amplitude", None) is not None:
            spec["amplitude"] = args.amplitude
        if getattr(args, "epoch_mean", None) is not None and args.generator == "shocks":
            spec["epoch_mean"] = args.epoch_mean
        config.schedule = spec
    if config.workers == 0:
        config.workers = default_workers()
    return config


# ---------------------------------------------------------------------------
# Subcommand bodies
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    config = _config_from_args(args)
    summary = run_simulate(config)
    print(f"wrote {config.output_dir}/summary.json (mode={summary['mode']})")
    if summary["mode"] == "exact":
        print(f"final centralized regret  {summary['final_regret_centralized']:.6f} "
              f"(bound {summary['final_bound_centralized']:.6f})")
        bound_d = summary["final_bound_decentralized"]
        bound_txt = f"(bound {bound_d:.6f})" if bound_d is not None else "(no bound: regularity violated)"
        print(f"final decentralized regret {summary['final_regret_decentralized']:.6f} {bound_txt}")
        if not summary["regularity_satisfied"]:
            print("warning: max_degree*beta >= 1; curvature-dependent columns are blank",
                  file=sys.stderr)
    return EXIT_OK


def _format_report_table(reports) -> str:
    rows = [("check", "lhs", "rhs", "margin", "status")]
    for r in reports:
        if not r.applicable:
            rows.append((r.name, "-", "-", "-", "n/a"))
            continue
        rows.append((r.name, f"{r.lhs:.6g}", f"{r.rhs:.6g}", f"{r.margin:.3g}",
                     "pass" if r.passed else "FAIL"))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _cmd_verify(args) -> int:
    config = _config_from_args(args)
    reports = run_verify(config, samples=args.samples, kernel_t_max=args.kernel_t_max)
    print(_format_report_table(reports))
    ok = suite_passed(reports)
    applicable = [r for r in reports if r.applicable]
    print(f"\n{sum(1 for r in applicable if r.passed)}/{len(applicable)} checks passed"
          + (f"; {len(reports) - len(applicable)} not applicable" if len(reports) != len(applicable) else ""))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.output}")
    return EXIT_OK if ok else EXIT_SUITE_FAILED


def _cmd_bounds(args) -> int:
    if args.graph:
        graph = load_graph_file(args.graph)
        n, delta = graph.num_vertices, graph.max_degree
    elif args.num_vertices is not None and args.max_degree is not None:
        from .core import build_graph

        n, delta = args.num_vertices, args.max_degree
        # a concrete graph realizing the requested maximum degree
        if delta >= n:
            raise ConfigError("max degree must be below the vertex count")
        graph = build_graph(n, [(1, v) for v in range(2, delta + 2)])
    else:
        raise ConfigError("either --graph or both --num-vertices and --max-degree are required")
    theta_d = args.theta_d if args.theta_d is not None else 1.0 / args.q
    if not (0 < theta_d <= 1.0 / args.q):
        raise ConfigError(f"theta-d must lie in (0, 1/q]; got {theta_d}")
    mu0_row = np.full(args.q, (1.0 - theta_d) / (args.q - 1)) if args.q > 1 else np.ones(1)
    mu0_row[0] = theta_d
    mu0 = DefaultMeasure(np.tile(mu0_row / mu0_row.sum(), (n, 1)))
    beta, T = args.beta, args.T

    regular = delta * beta < 1.0
    lines = [f"num_vertices={n} max_degree={delta} q={args.q} beta={beta} theta_d={theta_d!r}"]
    constants = None
    if regular:
        constants = theory_constants(graph, args.q, mu0, beta)
        lines.append(f"kappa_star={constants.kappa_star!r}")
        lines.append(f"K={constants.big_k!r}")
        lines.append(f"T0={constants.t_monotone}")
        lines.append(f"T1={constants.t_quarter}")
    else:
        lines.append("regularity condition violated (max_degree*beta >= 1): "
                     "decentralized-bound columns omitted")
    print("\n".join(lines))

    header = ["t", "bound_eq12"]
    if regular:
        header += ["bound_thm1", "delta_t", "K_p_t"]
    rows = [",".join(header)]
    decay = decay_polynomial_curve(T, 1.0 - constants.kappa_star) if regular else None
    bound_c_curve = []
    bound_d_curve = []
    for t in range(1, T + 1):
        bc = centralized_regret_bound(beta, graph, theta_d, t)
        bound_c_curve.append(bc)
        cells = [str(t), repr(bc)]
        if regular:
            bd = decentralized_regret_bound(constants, graph, args.q, beta, t)
            bound_d_curve.append(bd)
            from .theory import invariant_shift_bound

            cells += [repr(bd),
                      repr(invariant_shift_bound(beta, n, delta, t)),
                      repr(constants.big_k * decay[t - 1])]
        rows.append(",".join(cells))
    csv_text = "\n".join(rows) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
        print(f"wrote {args.output}")
        if args.plots:
            from . import plots

            ts = np.arange(1, T + 1)
            written = plots.render_bound_figures(
                ts, np.array(bound_c_curve),
                np.array(bound_d_curve) if regular else None,
                Path(args.output).parent)
            for w in written:
                print(f"wrote {w}")
    else:
        print(csv_text, end="")
    return EXIT_OK


def _cmd_gen(args) -> int:
    graph = load_graph_file(args.graph)
    if args.generator == "iid":
        schedule = generate_iid(graph, args.q, args.T, args.seed, args.amplitude)
    else:
        schedule = generate_shocks(graph, args.q, args.T, args.seed,
                                   args.epoch_mean, args.amplitude)
    save_schedule(schedule, args.out, graph, args.q)
    print(f"wrote {args.out} ({schedule.horizon} rounds, generator={args.generator})")
    return EXIT_OK


def _parse_profile(raw: str, n: int, q: int) -> np.ndarray:
    try:
        parts = [int(p) for p in raw.split(",")]
    except ValueError:
        raise ConfigError(f"profile must be comma-separated integers, got {raw!r}") from None
    if len(parts) != n:
        raise ConfigError(f"profile needs {n} entries, got {len(parts)}")
    if any(p < 1 or p > q for p in parts):
        raise ConfigError(f"profile actions must lie in 1..{q}")
    return np.array(parts, dtype=np.int64) - 1


def _cmd_oracle(args) -> int:
    from . import oracle
    from .theory import run_instance

    graph = load_graph_file(args.graph)
    schedule = load_schedule(args.schedule)
    if args.mu0 == "uniform":
        mu0 = DefaultMeasure.uniform(graph.num_vertices, args.q)
    else:
        mu0 = load_default_measure_file(args.mu0, graph.num_vertices, args.q)
    t = args.t
    if not (1 <= t <= schedule.horizon):
        raise ConfigError(f"--t must lie in 1..{schedule.horizon}")
    result: dict = {"quantity": args.quantity, "t": t}
    if args.quantity == "cost-at":
        if not args.profile:
            raise ConfigError("cost-at needs --profile")
        x = _parse_profile(args.profile, graph.num_vertices, args.q)
        result["value"] = oracle.brute_force_cost(schedule[t - 1], x, graph)
    elif args.quantity == "strategy-at":
        probs = oracle.brute_force_strategy(schedule, t, mu0, args.beta, graph)
        if args.profile:
            from .core import profile_index

            x = _parse_profile(args.profile, graph.num_vertices, args.q)
            result["probability"] = float(probs[profile_index(x, args.q)])
        else:
            result["probabilities"] = probs.tolist()
    elif args.quantity == "comparator":
        costs = schedule.costs[:t]
        from .centralized import best_static_comparator

        _, closed = best_static_comparator(costs, mu0, args.beta, graph)
        _, numeric = oracle.projected_gradient_comparator(costs, mu0, args.beta, graph)
        sampled = oracle.random_search_comparator(costs, mu0, args.beta, graph,
                                                  seed=args.seed)
        result.update({"closed_form": closed, "projected_gradient": numeric,
                       "random_search": sampled})
    elif args.quantity == "w1-pair":
        run = run_instance(graph, args.q, mu0, args.beta, schedule.costs, t)
        result.update(oracle.w1_certificates(run.mu(t), run.pi(t), graph, args.q,
                                             seed=args.seed))
    print(json.dumps(result, indent=2, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    handlers = {
        "simulate": _cmd_simulate,
        "verify": _cmd_verify,
        "bounds": _cmd_bounds,
        "gen": _cmd_gen,
        "oracle": _cmd_oracle,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, ScheduleFormatError, CapExceededError, RegularityError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
