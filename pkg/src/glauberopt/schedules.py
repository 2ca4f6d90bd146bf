"""Adversarial cost schedules: i.i.d. stress inputs, punctuated-equilibrium
shock sequences, and a JSON round-trip format that ties a schedule to its
graph by hash."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import NetworkCost, NetworkGraph

SCHEDULE_FORMAT = "glauberopt-schedule-v1"


class ScheduleFormatError(ValueError):
    """A schedule file failed to parse or validate."""


@dataclass(frozen=True)
class CostSchedule:
    """A horizon-T sequence of admissible network costs plus provenance
    (generator name, seed, parameters, graph hash) for exact replay."""

    horizon: int
    costs: tuple[NetworkCost, ...]
    provenance: dict

    def __post_init__(self):
        if self.horizon != len(self.costs):
            raise ValueError("horizon must match the number of rounds")

    def __len__(self) -> int:
        return self.horizon

    def __getitem__(self, i):
        return self.costs[i]


def _draw_cost(rng: np.random.Generator, graph: NetworkGraph, q: int,
               amplitude: float) -> NetworkCost:
    vc = rng.uniform(-amplitude, amplitude, size=(graph.num_vertices, q))
    ec = rng.uniform(-amplitude, amplitude, size=(graph.num_edges, q, q))
    return NetworkCost(vc, ec)


def generate_iid(graph: NetworkGraph, q: int, T: int, seed: int,
                 amplitude: float) -> CostSchedule:
    """Fresh uniform cost entries on [-amplitude, amplitude] each round."""
    if not (0.0 < amplitude <= 1.0):
        raise ValueError(f"amplitude must lie in (0, 1], got {amplitude}")
    if T < 1:
        raise ValueError("horizon must be at least 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    costs = tuple(_draw_cost(rng, graph, q, amplitude) for _ in range(T))
    provenance = {
        "generator": "iid",
        "seed": seed,
        "amplitude": amplitude,
        "graph_hash": graph.graph_hash(),
    }
    return CostSchedule(T, costs, provenance)


def generate_shocks(graph: NetworkGraph, q: int, T: int, seed: int,
                    epoch_mean: int, amplitude: float = 1.0) -> CostSchedule:
    """Piecewise-constant costs: epochs of geometrically distributed length
    (given mean) share one cost; each epoch boundary is an abrupt shock."""
    if epoch_mean < 1:
        raise ValueError(f"epoch mean must be at least 1, got {epoch_mean}")
    if not (0.0 < amplitude <= 1.0):
        raise ValueError(f"amplitude must lie in (0, 1], got {amplitude}")
    if T < 1:
        raise ValueError("horizon must be at least 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    costs: list[NetworkCost] = []
    while len(costs) < T:
        length = int(rng.geometric(1.0 / epoch_mean))
        cost = _draw_cost(rng, graph, q, amplitude)
        costs.extend([cost] * min(length, T - len(costs)))
    provenance = {
        "generator": "shocks",
        "seed": seed,
        "epoch_mean": epoch_mean,
        "amplitude": amplitude,
        "graph_hash": graph.graph_hash(),
    }
    return CostSchedule(T, tuple(costs), provenance)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def save_schedule(schedule: CostSchedule, path, graph: NetworkGraph, q: int) -> None:
    """Write the JSON schedule format (full-precision floats)."""
    doc = {
        "format": SCHEDULE_FORMAT,
        "num_vertices": graph.num_vertices,
        "num_edges": graph.num_edges,
        "q": q,
        "T": schedule.horizon,
        "graph_hash": graph.graph_hash(),
        "provenance": schedule.provenance,
        "rounds": [
            {
                "vertex_costs": f.vertex_costs.tolist(),
                "edge_costs": f.edge_costs.tolist(),
            }
            for f in schedule.costs
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def _require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise ScheduleFormatError(f"{path}: missing section {key!r}")
    return doc[key]


def load_schedule(path) -> CostSchedule:
    """Parse and validate a schedule file; errors name the offending
    section, round, and field."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScheduleFormatError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ScheduleFormatError(f"{path}: top level must be an object")
    fmt = _require(doc, "format", path)
    if fmt != SCHEDULE_FORMAT:
        raise ScheduleFormatError(f"{path}: unsupported format {fmt!r}")
    n = int(_require(doc, "num_vertices", path))
    num_edges = int(_require(doc, "num_edges", path))
    q = int(_require(doc, "q", path))
    T = int(_require(doc, "T", path))
    provenance = _require(doc, "provenance", path)
    rounds = _require(doc, "rounds", path)
    if not isinstance(rounds, list) or len(rounds) != T:
        raise ScheduleFormatError(f"{path}: 'rounds' must list exactly T={T} entries")
    costs = []
    for i, entry in enumerate(rounds, start=1):
        if not isinstance(entry, dict):
            raise ScheduleFormatError(f"{path}: round {i}: entry must be an object")
        for key in ("vertex_costs", "edge_costs"):
            if key not in entry:
                raise ScheduleFormatError(f"{path}: round {i}: missing field {key!r}")
        vc = np.asarray(entry["vertex_costs"], dtype=float)
        ec = np.asarray(entry["edge_costs"], dtype=float)
        if vc.shape != (n, q):
            raise ScheduleFormatError(
                f"{path}: round {i}: vertex_costs shaped {vc.shape}, expected ({n}, {q})"
            )
        expected_ec = (num_edges, q, q)
        if ec.shape != expected_ec and not (num_edges == 0 and ec.size == 0):
            raise ScheduleFormatError(
                f"{path}: round {i}: edge_costs shaped {ec.shape}, expected {expected_ec}"
            )
        if num_edges == 0:
            ec = ec.reshape((0, q, q))
        try:
            costs.append(NetworkCost(vc, ec))
        except ValueError as exc:
            raise ScheduleFormatError(f"{path}: round {i}: {exc}") from None
    if not isinstance(provenance, dict):
        raise ScheduleFormatError(f"{path}: 'provenance' must be an object")
    return CostSchedule(T, tuple(costs), dict(provenance))


def schedule_graph_hash(schedule: CostSchedule) -> str | None:
    value = schedule.provenance.get("graph_hash")
    return str(value) if value is not None else None


def check_schedule_matches(schedule: CostSchedule, graph: NetworkGraph, q: int) -> None:
    """Validate a loaded schedule against the instance it will drive."""
    expected = graph.graph_hash()
    found = schedule_graph_hash(schedule)
    if found is not None and found != expected:
        raise ScheduleFormatError(
            f"schedule was generated for graph {found[:12]}..., "
            f"but the configured graph hashes to {expected[:12]}..."
        )
    for i, f in enumerate(schedule.costs, start=1):
        if f.num_vertices != graph.num_vertices or f.edge_costs.shape[0] != graph.num_edges:
            raise ScheduleFormatError(
                f"round {i} cost shaped for {f.num_vertices} vertices / "
                f"{f.edge_costs.shape[0]} edges; graph has {graph.num_vertices} / {graph.num_edges}"
            )
        if f.q != q:
            raise ScheduleFormatError(f"round {i} cost has q={f.q}, configured q={q}")


def schedule_from_spec(graph: NetworkGraph, q: int, spec: dict) -> CostSchedule:
    """Build a schedule from a config dict: either {'path': ...} or a
    generator spec {'generator': 'iid'|'shocks', 'seed': ..., ...}."""
    if "path" in spec:
        schedule = load_schedule(spec["path"])
        check_schedule_matches(schedule, graph, q)
        return schedule
    generator = spec.get("generator")
    if generator == "iid":
        return generate_iid(graph, q, int(spec["T"]), int(spec["seed"]),
                            float(spec.get("amplitude", 1.0)))
    if generator == "shocks":
        return generate_shocks(graph, q, int(spec["T"]), int(spec["seed"]),
                               int(spec["epoch_mean"]), float(spec.get("amplitude", 1.0)))
    raise ScheduleFormatError(f"unknown schedule spec: {spec!r}")
