import json

import numpy as np
import pytest

from glauberopt import build_graph
from glauberopt.schedules import (
    CostSchedule,
    ScheduleFormatError,
    check_schedule_matches,
    generate_iid,
    generate_shocks,
    load_schedule,
    save_schedule,
    schedule_from_spec,
)


def test_iid_amplitude_validation(path4):
    with pytest.raises(ValueError, match="amplitude"):
        generate_iid(path4, 2, 5, 0, 0.0)
    with pytest.raises(ValueError, match="amplitude"):
        generate_iid(path4, 2, 5, 0, 1.5)
    generate_iid(path4, 2, 5, 0, 1.0)  # boundary value allowed


def test_iid_deterministic(path4):
    a = generate_iid(path4, 2, 10, 77, 0.8)
    b = generate_iid(path4, 2, 10, 77, 0.8)
    for fa, fb in zip(a.costs, b.costs):
        np.testing.assert_array_equal(fa.vertex_costs, fb.vertex_costs)
        np.testing.assert_array_equal(fa.edge_costs, fb.edge_costs)
    c = generate_iid(path4, 2, 10, 78, 0.8)
    assert not np.array_equal(a.costs[0].vertex_costs, c.costs[0].vertex_costs)


def test_iid_entries_uniform(path4):
    """Kolmogorov-Smirnov style check of the entry distribution."""
    sched = generate_iid(path4, 2, 500, 3, 1.0)
    entries = np.concatenate(
        [f.vertex_costs.ravel() for f in sched.costs]
        + [f.edge_costs.ravel() for f in sched.costs])
    assert len(entries) >= 10**4
    xs = np.sort(entries)
    cdf = (xs + 1.0) / 2.0  # uniform on [-1, 1]
    emp = np.arange(1, len(xs) + 1) / len(xs)
    assert np.abs(emp - cdf).max() <= 0.02
    assert xs.min() < -0.99 and xs.max() > 0.99


def test_shocks_validation(path4):
    with pytest.raises(ValueError, match="epoch mean"):
        generate_shocks(path4, 2, 10, 0, 0)


def test_shocks_long_epoch_nearly_constant(path4):
    sched = generate_shocks(path4, 2, 30, 12, 10**6)
    first = sched.costs[0]
    assert all(f is first for f in sched.costs)


def test_shocks_unit_epoch_fresh_draws(path4):
    sched = generate_shocks(path4, 2, 30, 5, 1)
    changes = sum(
        not np.array_equal(a.vertex_costs, b.vertex_costs)
        for a, b in zip(sched.costs, sched.costs[1:]))
    assert changes >= 25  # geometric with mean 1 concentrates on length 1


def test_shock_count_statistics(path4):
    """Epoch boundaries arrive at rate ~ 1/epoch_mean."""
    T, mean = 60, 6
    total = 0
    for seed in range(1000):
        sched = generate_shocks(path4, 2, T, seed, mean)
        total += sum(
            not np.array_equal(a.vertex_costs, b.vertex_costs)
            for a, b in zip(sched.costs, sched.costs[1:]))
    avg = total / 1000
    expected = (T - 1) / mean
    assert abs(avg - expected) <= 0.1 * expected


def test_roundtrip_bit_identical(tmp_path, path4):
    sched = generate_iid(path4, 2, 8, 123, 1.0)
    p = tmp_path / "sched.json"
    save_schedule(sched, p, path4, 2)
    loaded = load_schedule(p)
    assert loaded.horizon == sched.horizon
    assert loaded.provenance == sched.provenance
    for fa, fb in zip(sched.costs, loaded.costs):
        np.testing.assert_array_equal(fa.vertex_costs, fb.vertex_costs)
        np.testing.assert_array_equal(fa.edge_costs, fb.edge_costs)


def test_load_rejects_out_of_range(tmp_path, path4):
    sched = generate_iid(path4, 2, 3, 7, 1.0)
    p = tmp_path / "sched.json"
    save_schedule(sched, p, path4, 2)
    doc = json.loads(p.read_text())
    doc["rounds"][1]["edge_costs"][0][0][1] = 1.5
    p.write_text(json.dumps(doc))
    with pytest.raises(ScheduleFormatError, match=r"round 2.*\[-1, 1\]"):
        load_schedule(p)


def test_load_rejects_truncated(tmp_path, path4):
    sched = generate_iid(path4, 2, 3, 7, 1.0)
    p = tmp_path / "sched.json"
    save_schedule(sched, p, path4, 2)
    doc = json.loads(p.read_text())
    del doc["rounds"]
    p.write_text(json.dumps(doc))
    with pytest.raises(ScheduleFormatError, match="missing section 'rounds'"):
        load_schedule(p)


def test_load_rejects_invalid_json(tmp_path):
    p = tmp_path / "garbage.json"
    p.write_text("{not json")
    with pytest.raises(ScheduleFormatError, match="invalid JSON"):
        load_schedule(p)


def test_load_rejects_wrong_round_count(tmp_path, path4):
    sched = generate_iid(path4, 2, 3, 7, 1.0)
    p = tmp_path / "sched.json"
    save_schedule(sched, p, path4, 2)
    doc = json.loads(p.read_text())
    doc["rounds"] = doc["rounds"][:2]
    p.write_text(json.dumps(doc))
    with pytest.raises(ScheduleFormatError, match="exactly T=3"):
        load_schedule(p)


def test_load_rejects_missing_field(tmp_path, path4):
    sched = generate_iid(path4, 2, 2, 7, 1.0)
    p = tmp_path / "sched.json"
    save_schedule(sched, p, path4, 2)
    doc = json.loads(p.read_text())
    del doc["rounds"][0]["vertex_costs"]
    p.write_text(json.dumps(doc))
    with pytest.raises(ScheduleFormatError, match="round 1: missing field 'vertex_costs'"):
        load_schedule(p)


def test_graph_hash_mismatch(tmp_path, path4):
    other = build_graph(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
    sched = generate_iid(other, 2, 3, 7, 1.0)
    check_schedule_matches(sched, other, 2)
    with pytest.raises(ScheduleFormatError, match="hashes to"):
        check_schedule_matches(sched, path4, 2)


def test_schedule_from_spec(tmp_path, path4):
    sched = generate_iid(path4, 2, 4, 9, 1.0)
    p = tmp_path / "s.json"
    save_schedule(sched, p, path4, 2)
    via_path = schedule_from_spec(path4, 2, {"path": str(p)})
    assert via_path.horizon == 4
    via_gen = schedule_from_spec(path4, 2, {"generator": "iid", "T": 4, "seed": 9})
    np.testing.assert_array_equal(via_gen.costs[0].vertex_costs,
                                  sched.costs[0].vertex_costs)
    with pytest.raises(ScheduleFormatError, match="unknown schedule spec"):
        schedule_from_spec(path4, 2, {"generator": "bogus"})


def test_provenance_recorded(path4):
    sched = generate_shocks(path4, 2, 10, 42, 3, amplitude=0.5)
    assert sched.provenance["generator"] == "shocks"
    assert sched.provenance["epoch_mean"] == 3
    assert sched.provenance["graph_hash"] == path4.graph_hash()
    assert len(sched) == 10
    assert isinstance(sched[0], type(sched.costs[0]))


def test_horizon_mismatch_rejected(path4):
    costs = generate_iid(path4, 2, 3, 1, 1.0).costs
    with pytest.raises(ValueError, match="horizon"):
        CostSchedule(5, costs, {})
