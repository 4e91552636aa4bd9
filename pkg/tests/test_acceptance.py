"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``; the lines are repeated in
the terminal summary.
"""

import json
import math
import random
import statistics
import time

import numpy as np
import pytest

from conftest import parallel_chains, path_weight, ranked_paths, record_criterion
from equiroute.cli import main
from equiroute.equity import TABLE1, dte, free_flow_dtx, gini
from equiroute.flow import EntryLog, PlanRegistry, estimate_future_flow, monitor_adjacent_flow
from equiroute.network import Edge, RoadNetwork, Route, bpr_travel_time
from equiroute.paths import NoRouteError, k_shortest_routes
from equiroute.sim import COMPLETED, Scenario, ScenarioConfig, VehicleSpec, generate_scenario, replay_mismatches, run
from equiroute.synthetic import boston_like

SEEDS = range(10)


def test_criterion_1_free_flow_equity():
    start = time.perf_counter()
    net = parallel_chains(3, 6, free_flow_time=1.0)
    specs = (
        VehicleSpec(0, "private", 0, 5, 0.0),
        VehicleSpec(1, "autonomous", 6, 11, 0.0),
        VehicleSpec(2, "ride_hailing", 12, 17, 0.0),
    )
    res = run(Scenario(net, specs, TABLE1, dt=1.0), "equity")
    elapsed = time.perf_counter() - start

    inflation = max(t.travel_time / net.edges[t.edge].free_flow_time - 1 for v in res.vehicles for t in v.experienced)
    gaps = {r.mode: abs(r.dtx - free_flow_dtx(TABLE1[r.mode], TABLE1).value) for r in res.records}
    ok = (
        all(r.status == COMPLETED for r in res.records)
        and inflation < 1e-3
        and max(gaps.values()) <= 1e-3
        and res.fleet_dte >= 0.999
        and elapsed < 1.0
    )
    record_criterion(1, ok, f"max DTX gap {max(gaps.values()):.2e}, fleet DTE {res.fleet_dte:.6f}, "
                            f"BPR inflation {inflation:.1e}, {elapsed:.3f}s")
    assert ok


@pytest.fixture(scope="module")
def preset_runs():
    net = boston_like()
    runs, seconds = {}, {}
    for seed in SEEDS:
        sc = generate_scenario(net, ScenarioConfig(), seed)
        start = time.perf_counter()
        runs[seed] = {s: run(sc, s) for s in ("psr", "dsr", "equity")}
        seconds[seed] = time.perf_counter() - start
    return net, runs, seconds


def test_criterion_2_strategy_ordering(preset_runs):
    net, runs, seconds = preset_runs
    assert len(net.nodes) == 58
    dte_of = {seed: {s: r.fleet_dte for s, r in rs.items()} for seed, rs in runs.items()}
    ordered = [seed for seed, d in dte_of.items() if d["equity"] >= d["dsr"] >= d["psr"]]
    median_gain = statistics.median(d["equity"] - d["psr"] for d in dte_of.values())
    for seed, d in dte_of.items():
        print(f"  seed {seed}: psr {d['psr']:.6f} dsr {d['dsr']:.6f} equity {d['equity']:.6f}")
    ok = len(ordered) >= 9 and median_gain >= 0.02 and max(seconds.values()) < 300
    record_criterion(2, ok, f"ordering holds on {len(ordered)}/10 seeds, median equity-psr {median_gain:.2e} "
                            f"(needs >= 0.02), slowest seed {max(seconds.values()):.1f}s")
    assert ok


def random_multiset(rng: np.random.Generator) -> np.ndarray:
    n = int(rng.integers(1, 201))
    kind = rng.integers(0, 4)
    if kind == 0:
        return np.full(n, rng.uniform(0.01, 1.0))
    if kind == 1:
        # few distinct values, many ties
        return rng.choice(rng.uniform(0.01, 1.0, size=3), size=n)
    return rng.uniform(1e-3, 1.0, size=n)


def oracle_gini(x: np.ndarray) -> float:
    pair = math.fsum(np.abs(x[:, None] - x[None, :]).ravel())
    return pair / (2 * x.size * x.size * (math.fsum(x) / x.size))


def test_criterion_3_gini_properties():
    rng = np.random.default_rng(20250611)
    failures = []
    for i in range(1000):
        x = random_multiset(rng)
        d = dte([(v, 1) for v in x]).dte
        g = gini(x)
        checks = {
            "range": 0.0 <= d <= 1.0,
            "equal iff one": (d == 1.0) == (np.unique(x).size == 1),
            "permutation": gini(rng.permutation(x)) == g,
            "scaling": all(abs(gini(lam * x) - g) <= 1e-12 for lam in (0.5, 2.0, 10.0)),
            "oracle": abs(g - oracle_gini(x)) <= 1e-12,
        }
        failures += [(i, name) for name, good in checks.items() if not good]
    ok = not failures
    record_criterion(3, ok, f"1000 multisets, {len(failures)} property violations {failures[:3]}")
    assert ok


def random_digraph(rng: random.Random) -> RoadNetwork:
    n = rng.randint(2, 8)
    p = rng.uniform(0.15, 0.8)
    integer = rng.random() < 0.5
    edges = [
        Edge(u, v, float(rng.randint(1, 4)) if integer else rng.uniform(0.05, 5.0))
        for u in range(n)
        for v in range(n)
        if u != v and rng.random() < p
    ]
    return RoadNetwork.from_edges(edges, nodes=range(n))


def test_criterion_4_k_shortest_oracle():
    rng = random.Random(4)
    mismatches, compared = [], 0
    for g in range(500):
        net = random_digraph(rng)
        w = net.free_flow_weights()
        target = max(net.nodes)
        ranked = ranked_paths(net, w, 0, target)
        for L in (1, 3, 7):
            compared += 1
            if not ranked:
                try:
                    k_shortest_routes(net, w, 0, target, L)
                    mismatches.append((g, L, "expected no route"))
                except NoRouteError:
                    pass
                continue
            got = k_shortest_routes(net, w, 0, target, L)
            want = ranked[:L]
            if [r.nodes for r in got.routes] != want or list(got.costs) != [path_weight(p, w) for p in want]:
                mismatches.append((g, L))
    ok = not mismatches
    record_criterion(4, ok, f"{compared} (graph, L) cases, {len(mismatches)} mismatches {mismatches[:3]}")
    assert ok


def test_criterion_5_flow_formulas():
    dt = 1.0
    e = (0, 1)
    log = EntryLog()
    alone = monitor_adjacent_flow(log, e, 10.0, dt, 0)
    log.append(1, e, 9.0)  # lower boundary
    log.append(2, e, 10.0)
    log.append(3, e, 11.5)  # outside
    two = monitor_adjacent_flow(log, e, 10.0, dt, 0)

    net = RoadNetwork.from_edges([Edge(0, 1, 1.0), Edge(1, 2, 1.0)])
    reg = PlanRegistry(net)
    est_alone = estimate_future_flow(reg, net, (1, 2), 5.0, dt, 0)
    reg.register(1, Route((0, 1, 2)), 3.0)  # projected onto (1, 2) at 4.0, the boundary
    reg.register(2, Route((1, 2)), 6.0)  # upper boundary
    reg.register(3, Route((1, 2)), 6.5)
    est_two = estimate_future_flow(reg, net, (1, 2), 5.0, dt, 0)

    edge = Edge(0, 1, 2.5, capacity=5.0)
    bpr = [bpr_travel_time(edge, r * 5.0) for r in (0, 1, 2)]
    checks = {
        "monitor (0+1)/2dt": alone == 1 / (2 * dt),
        "monitor (2+1)/2dt with boundary": two == 3 / (2 * dt),
        "estimate (0+1)/2dt": est_alone == 1 / (2 * dt),
        "estimate (2+1)/2dt with boundary": est_two == 3 / (2 * dt),
        "bpr ratio 0": bpr[0] == 2.5,
        "bpr ratio 1": abs(bpr[1] - 1.15 * 2.5) <= 1e-12,
        "bpr ratio 2": abs(bpr[2] - 3.4 * 2.5) <= 1e-12,
    }
    bad = [k for k, good in checks.items() if not good]
    ok = not bad
    record_criterion(5, ok, f"{len(checks) - len(bad)}/{len(checks)} fixtures exact {bad}")
    assert ok


def test_criterion_6_determinism(tmp_path):
    outputs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 4)):
        cfg = tmp_path / f"{tag}.json"
        cfg.write_text(json.dumps({"sim": {"seed": 7, "workers": workers}}))
        out = tmp_path / tag
        assert main(["compare", "--config", str(cfg), "--out", str(out)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
    same = outputs[0] == outputs[1] == outputs[2]
    ok = same and len(outputs[0]) == 5
    record_criterion(6, ok, f"{len(outputs[0])} CSV files byte-identical across 2 runs and workers 1 vs 4: {same}")
    assert ok


def test_criterion_7_conservation_and_replay(preset_runs):
    net, runs, _ = preset_runs
    failed = incomplete = mismatched = traversals = 0
    for rs in runs.values():
        for res in rs.values():
            failed += len(res.failed)
            incomplete += len(res.records) - len(res.completed) - len(res.failed)
            mismatched += len(replay_mismatches(res, net))
            traversals += sum(len(v.experienced) for v in res.vehicles)
    ok = failed == 0 and incomplete == 0 and mismatched == 0
    record_criterion(7, ok, f"30 runs: {failed} failed, {incomplete} unaccounted, "
                            f"{mismatched}/{traversals} traversals off replay")
    assert ok
