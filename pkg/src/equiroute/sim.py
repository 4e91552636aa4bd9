"""Deterministic discrete-event fleet simulation.

Vehicles replan at every node they reach (their decision points). The time
to cross an edge is fixed when the vehicle enters it, from the BPR curve
evaluated at the flow monitored on that edge at that instant.
"""

from __future__ import annotations

import csv
from bisect import bisect_left, bisect_right
import heapq
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .equity import MODES, DtxScore, EquityReport, ModeParams, ModeTable, TABLE1, TripMinima, dte, dtx_from_time
from .flow import EntryLog, PlanRegistry, monitor_adjacent_flow
from .network import RoadNetwork, Route, bpr_travel_time
from .paths import DEFAULT_L, CandidateCache, NoRouteError
from .planner import STRATEGIES, PlanningDecision, WorldSnapshot, plan_dsr, plan_equity, plan_psr

log = logging.getLogger(__name__)

WAITING, EN_ROUTE, COMPLETED, FAILED = "waiting", "en_route", "completed", "failed"


class ConfigError(ValueError):
    pass


class StateError(RuntimeError):
    pass


@dataclass(frozen=True)
class Traversal:
    edge: tuple[int, int]
    entry: float
    flow: float
    travel_time: float


@dataclass
class VehicleState:
    id: int
    mode: str
    origin: int
    destination: int
    departure: float
    minima: TripMinima | None = None
    location: int | None = None  # node the vehicle is at, or is heading to while on an edge
    plan: Route | None = None
    experienced: list[Traversal] = field(default_factory=list)
    arrivals: list[float] = field(default_factory=list)
    status: str = WAITING
    completion: float | None = None
    note: str = ""

    @property
    def travel_time(self) -> float:
        total = 0.0
        for t in self.experienced:
            total += t.travel_time
        return total

    @property
    def experienced_route(self) -> Route:
        if not self.experienced:
            return Route((self.origin,))
        return Route((self.experienced[0].edge[0],) + tuple(t.edge[1] for t in self.experienced))


@dataclass(frozen=True)
class VehicleSpec:
    id: int
    mode: str
    origin: int
    destination: int
    departure: float


@dataclass(frozen=True)
class ScenarioConfig:
    counts: tuple[tuple[str, int], ...] = (("private", 500), ("autonomous", 300), ("ride_hailing", 200))
    occupancy: int = 2
    window: tuple[float, float] = (0.0, 120.0)  # minutes
    modes: ModeTable = TABLE1
    dt: float = 1.0  # monitoring half-width, minutes
    L: int = DEFAULT_L
    workers: int = 1

    def __post_init__(self):
        for mode, n in self.counts:
            if mode not in MODES:
                raise ConfigError(f"unknown mode {mode!r}")
            if n < 0:
                raise ConfigError(f"count for {mode} must be >= 0")
        if not self.window[0] < self.window[1]:
            raise ConfigError("departure window start must precede its end")
        if self.occupancy < 1:
            raise ConfigError("occupancy must be >= 1")
        if not self.dt > 0:
            raise ConfigError("monitoring half-width must be > 0")
        if self.L < 1:
            raise ConfigError("L must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass(frozen=True)
class Scenario:
    network: RoadNetwork
    vehicles: tuple[VehicleSpec, ...]
    modes: ModeTable
    dt: float = 1.0
    L: int = DEFAULT_L
    seed: int | None = None
    workers: int = 1


def generate_scenario(network: RoadNetwork, config: ScenarioConfig = ScenarioConfig(), seed: int = 0) -> Scenario:
    """Sample departures uniformly in the window and OD pairs uniformly."""
    if not network.origins or not network.destinations:
        raise ConfigError("network needs at least one origin and one destination")
    rng = np.random.default_rng(seed)
    mode_list = [m for m, n in config.counts for _ in range(n)]
    n = len(mode_list)
    order = rng.permutation(n)
    departures = rng.uniform(config.window[0], config.window[1], size=n)
    o_idx = rng.integers(0, len(network.origins), size=n)
    d_idx = rng.integers(0, len(network.destinations), size=n)
    vehicles = tuple(
        VehicleSpec(
            i,
            mode_list[order[i]],
            network.origins[o_idx[i]],
            network.destinations[d_idx[i]],
            float(departures[i]),
        )
        for i in range(n)
    )
    return Scenario(
        network,
        vehicles,
        config.modes.with_occupancy(config.occupancy),
        dt=config.dt,
        L=config.L,
        seed=seed,
        workers=config.workers,
    )


class EventQueue:
    """Min-heap ordered by (time, push sequence)."""

    def __init__(self):
        self._heap: list[tuple[float, int, int]] = []
        self._seq = 0

    def push(self, time: float, vehicle: int) -> None:
        heapq.heappush(self._heap, (time, self._seq, vehicle))
        self._seq += 1

    def pop(self) -> tuple[float, int, int]:
        return heapq.heappop(self._heap)

    def pop_batch(self) -> tuple[float, list[int]]:
        """All events sharing the earliest timestamp, in push order."""
        time, _, vehicle = heapq.heappop(self._heap)
        batch = [vehicle]
        while self._heap and self._heap[0][0] == time:
            batch.append(heapq.heappop(self._heap)[2])
        return time, batch

    def __len__(self) -> int:
        return len(self._heap)


@dataclass(frozen=True)
class VehicleRecord:
    id: int
    mode: str
    origin: int
    destination: int
    depart: float
    complete: float | None
    travel: float | None
    cost: float | None
    dtx: float | None
    status: str
    occupancy: int

    CSV_FIELDS = ("id", "mode", "origin", "dest", "depart_min", "complete_min", "travel_min", "cost_usd", "dtx", "strategy")

    def csv_row(self, strategy: str) -> list:
        return [self.id, self.mode, self.origin, self.destination, self.depart,
                _blank(self.complete), _blank(self.travel), _blank(self.cost), _blank(self.dtx), strategy]


def _blank(x):
    return "" if x is None else x


@dataclass
class RunResults:
    strategy: str
    records: list[VehicleRecord]
    equity: EquityReport | None
    vehicles: list[VehicleState]
    dt: float
    decisions: int = 0

    @property
    def completed(self) -> list[VehicleRecord]:
        return [r for r in self.records if r.status == COMPLETED]

    @property
    def failed(self) -> list[VehicleRecord]:
        return [r for r in self.records if r.status == FAILED]

    @property
    def fleet_dte(self) -> float | None:
        return None if self.equity is None else self.equity.dte

    def mode_means(self) -> dict[str, dict[str, float]]:
        out = {}
        for mode in MODES:
            rows = [r for r in self.completed if r.mode == mode and r.dtx is not None]
            if rows:
                out[mode] = {
                    "n": len(rows),
                    "mean_travel_min": math.fsum(r.travel for r in rows) / len(rows),
                    "mean_cost_usd": math.fsum(r.cost for r in rows) / len(rows),
                    "mean_dtx": math.fsum(r.dtx for r in rows) / len(rows),
                }
        return out

    def summary(self) -> dict:
        return {
            "strategy": self.strategy,
            "vehicles": len(self.records),
            "completed": len(self.completed),
            "failed": len(self.failed),
            "fleet_dte": self.fleet_dte,
            "mean_dtx": None if self.equity is None else self.equity.mean,
            "travelers": None if self.equity is None else len(self.equity.dtx_multiset),
            "per_mode": self.mode_means(),
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(VehicleRecord.CSV_FIELDS)
        for r in self.records:
            w.writerow(r.csv_row(self.strategy))
        return buf.getvalue()


def final_dtx(vehicle: VehicleState, minima: TripMinima, mode: ModeParams) -> DtxScore:
    """DTX of a finished trip from its realised travel time."""
    if vehicle.status != COMPLETED:
        raise StateError(f"vehicle {vehicle.id} has not completed its trip")
    return dtx_from_time(vehicle.travel_time, minima, mode)


class Simulation:
    """Event loop state for one strategy on one scenario."""

    def __init__(self, scenario: Scenario, strategy: str):
        if strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
        self.scenario = scenario
        self.strategy = strategy
        self.network = scenario.network
        self.modes = scenario.modes
        self.dt = scenario.dt
        self.cache = CandidateCache.for_network(self.network)
        self.log = EntryLog()
        self.registry = PlanRegistry(self.network)
        self.queue = EventQueue()
        self.vehicles: dict[int, VehicleState] = {}
        self.decisions = 0
        self._prune_lag = 2 * self.dt + self.network.max_free_flow_time
        self._last_prune = 0.0
        self._minima: dict[tuple[int, int], TripMinima] = {}

    def minima(self, origin: int, dest: int) -> TripMinima:
        key = (origin, dest)
        hit = self._minima.get(key)
        if hit is None:
            tau = 0.0
            if origin != dest:
                route = self.cache.shortest(origin, dest)
                for e in route.edges:
                    tau += self.network.edges[e].free_flow_time
            hit = TripMinima(tau, self.modes.epsilon_min * tau, self.modes.q_min)
            self._minima[key] = hit
        return hit

    def run(self) -> RunResults:
        executor = ThreadPoolExecutor(self.scenario.workers) if self.scenario.workers > 1 else None
        try:
            for spec in self.scenario.vehicles:
                v = VehicleState(spec.id, spec.mode, spec.origin, spec.destination, spec.departure)
                self.vehicles[v.id] = v
                self.queue.push(spec.departure, v.id)
            while self.queue:
                now, batch = self.queue.pop_batch()
                entering = []
                for vid in batch:
                    if self._at_node(self.vehicles[vid], now, executor):
                        entering.append(vid)
                # Traversal times use the log after every same-instant entry is in.
                for vid in entering:
                    self._enter_edge(self.vehicles[vid], now)
                if now - self._last_prune > self._prune_lag:
                    self.log.prune(now - self._prune_lag)
                    self._last_prune = now
        finally:
            if executor is not None:
                executor.shutdown()
        return self._results()

    def _at_node(self, v: VehicleState, now: float, executor) -> bool:
        if v.status == WAITING:
            v.status = EN_ROUTE
            v.location = v.origin
            try:
                v.minima = self.minima(v.origin, v.destination)
            except NoRouteError as exc:
                return self._fail(v, str(exc))
        v.arrivals.append(now)
        if v.location == v.destination:
            v.status = COMPLETED
            v.completion = now
            v.plan = Route((v.location,))
            self.registry.remove(v.id)
            if v.minima.degenerate:
                v.note = "degenerate trip (origin equals destination)"
                log.warning("vehicle %d: %s", v.id, v.note)
            return False
        try:
            route = self._decide(v, now, executor)
        except NoRouteError as exc:
            return self._fail(v, str(exc))
        v.plan = route
        self.registry.register(v.id, route, now)
        self.log.append(v.id, route.edges[0], now)
        return True

    def _decide(self, v: VehicleState, now: float, executor) -> Route:
        if self.strategy == "psr" and v.plan is not None:
            return Route(v.plan.nodes[1:])
        self.decisions += 1
        if self.strategy == "psr":
            decision = plan_psr(v, self.network, self.cache)
        else:
            world = WorldSnapshot(
                self.network, self.log, self.registry, self.modes, now, self.dt,
                self.vehicles, self.cache, executor,
            )
            planner = plan_dsr if self.strategy == "dsr" else plan_equity
            decision = planner(v, world, self.scenario.L)
        return decision.route

    def _enter_edge(self, v: VehicleState, now: float) -> None:
        edge = v.plan.edges[0]
        flow = monitor_adjacent_flow(self.log, edge, now, self.dt, v.id)
        tau = bpr_travel_time(self.network.edges[edge], flow, self.network.bpr_alpha, self.network.bpr_beta)
        v.experienced.append(Traversal(edge, now, flow, tau))
        v.location = edge[1]
        self.queue.push(now + tau, v.id)

    def _fail(self, v: VehicleState, reason: str) -> bool:
        v.status = FAILED
        v.note = reason
        self.registry.remove(v.id)
        log.warning("vehicle %d failed: %s", v.id, reason)
        return False

    def _results(self) -> RunResults:
        records, entries = [], []
        for vid in sorted(self.vehicles):
            v = self.vehicles[vid]
            mode = self.modes[v.mode]
            if v.status == COMPLETED:
                travel = v.travel_time
                score = final_dtx(v, v.minima, mode).value
                rec = VehicleRecord(v.id, v.mode, v.origin, v.destination, v.departure, v.completion,
                                    travel, mode.epsilon * travel, score, v.status, mode.occupancy)
                if not v.minima.degenerate:
                    entries.append((score, mode.occupancy))
            else:
                rec = VehicleRecord(v.id, v.mode, v.origin, v.destination, v.departure, None,
                                    None, None, None, v.status, mode.occupancy)
            records.append(rec)
        report = dte(entries) if entries else None
        return RunResults(self.strategy, records, report, [self.vehicles[k] for k in sorted(self.vehicles)],
                          self.dt, self.decisions)


def run(scenario: Scenario, strategy: str) -> RunResults:
    return Simulation(scenario, strategy).run()


def replay_mismatches(results: RunResults, network: RoadNetwork) -> list[tuple[int, Traversal, float]]:
    """Recompute every edge time from the full entry history.

    A vehicle entering edge ``e`` at ``a`` saw every entry on ``e`` with time
    in ``[a - dt, a]`` (later entries did not exist yet), plus itself.
    Returns the traversals whose recorded time differs from the replay.
    """
    by_edge: dict[tuple[int, int], list[tuple[float, int]]] = {}
    for v in results.vehicles:
        for t in v.experienced:
            by_edge.setdefault(t.edge, []).append((t.entry, v.id))
    times = {}
    for edge, rows in by_edge.items():
        rows.sort()
        times[edge] = [when for when, _ in rows]
    dt = results.dt
    bad = []
    for v in results.vehicles:
        prev_arrival = v.departure
        for t in v.experienced:
            lo = bisect_left(times[t.edge], t.entry - dt)
            hi = bisect_right(times[t.edge], t.entry)
            others = sum(1 for _, who in by_edge[t.edge][lo:hi] if who != v.id)
            flow = (others + 1) / (2.0 * dt)
            tau = bpr_travel_time(network.edges[t.edge], flow, network.bpr_alpha, network.bpr_beta)
            if tau != t.travel_time or t.entry != prev_arrival:
                bad.append((v.id, t, tau))
            prev_arrival = t.entry + t.travel_time
    return bad


def fleet_report(records: Iterable[VehicleRecord]) -> EquityReport | None:
    entries = [(r.dtx, r.occupancy) for r in records if r.status == COMPLETED and r.travel]
    return dte(entries) if entries else None
