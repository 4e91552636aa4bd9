"""Link-flow monitoring from logged entries and plan-based flow estimation.

All flows are veh/min, all times are minutes. A vehicle always counts
itself, so a flow is never lower than ``1 / (2 * dt)``.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import NamedTuple

from .network import NetworkError, RoadNetwork, Route, bpr_travel_time

EdgeKey = tuple[int, int]


@dataclass(frozen=True)
class MonitorWindow:
    center: float
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be > 0")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width


def in_window(t: float, window: MonitorWindow) -> bool:
    return window.lower <= t <= window.upper


class EntryRecord(NamedTuple):
    vehicle: int
    edge: EdgeKey
    time: float


class EntryLog:
    """Append-only record of edge entries, indexed per edge.

    Entries must be appended in non-decreasing time order (the event loop
    guarantees this), which keeps each per-edge list sorted.
    """

    def __init__(self):
        self._times: dict[EdgeKey, list[float]] = {}
        self._vehicles: dict[EdgeKey, list[int]] = {}
        self.latest = float("-inf")

    def append(self, vehicle: int, edge: EdgeKey, time: float) -> None:
        if time < 0:
            raise ValueError("entry time must be non-negative")
        if time < self.latest:
            raise ValueError("entries must be appended in time order")
        self.latest = time
        self._times.setdefault(edge, []).append(time)
        self._vehicles.setdefault(edge, []).append(vehicle)

    def count_in(self, edge: EdgeKey, lower: float, upper: float, exclude: int | None = None) -> int:
        times = self._times.get(edge)
        if not times:
            return 0
        lo = bisect_left(times, lower)
        hi = bisect_right(times, upper)
        if exclude is None:
            return hi - lo
        vehicles = self._vehicles[edge]
        return sum(1 for k in range(lo, hi) if vehicles[k] != exclude)

    def prune(self, before: float) -> None:
        """Drop entries strictly older than ``before``."""
        for edge, times in self._times.items():
            cut = bisect_left(times, before)
            if cut:
                del times[:cut]
                del self._vehicles[edge][:cut]

    def records(self) -> list[EntryRecord]:
        out = [
            EntryRecord(v, edge, t)
            for edge in self._times
            for t, v in zip(self._times[edge], self._vehicles[edge])
        ]
        out.sort(key=lambda r: (r.time, r.edge, r.vehicle))
        return out

    def __len__(self) -> int:
        return sum(len(t) for t in self._times.values())


@dataclass(frozen=True)
class Plan:
    """A registered remaining route and its free-flow entry-time projection."""

    vehicle: int
    route: Route
    head_time: float  # actual arrival at route.nodes[0]
    entry_times: tuple[float, ...]  # projected entry time per edge
    free_flow_remaining: float


class PlanRegistry:
    """Current remaining plan of every active vehicle, indexed by edge."""

    def __init__(self, network: RoadNetwork):
        self.network = network
        self._plans: dict[int, Plan] = {}
        self._by_edge: dict[EdgeKey, dict[int, float]] = {}

    def register(self, vehicle: int, route: Route, head_time: float) -> Plan:
        self.remove(vehicle)
        entries = []
        t = head_time
        remaining = 0.0
        for key in route.edges:
            entries.append(t)
            tau0 = self.network.edge(*key).free_flow_time
            t += tau0
            remaining += tau0
        plan = Plan(vehicle, route, head_time, tuple(entries), remaining)
        self._plans[vehicle] = plan
        for key, et in zip(route.edges, entries):
            self._by_edge.setdefault(key, {})[vehicle] = et
        return plan

    def remove(self, vehicle: int) -> None:
        old = self._plans.pop(vehicle, None)
        if old is None:
            return
        for key in old.route.edges:
            bucket = self._by_edge[key]
            del bucket[vehicle]
            if not bucket:
                del self._by_edge[key]

    def get(self, vehicle: int) -> Plan | None:
        return self._plans.get(vehicle)

    def vehicles_on(self, edge: EdgeKey) -> dict[int, float]:
        """``{vehicle: projected entry time}`` for plans that use ``edge``."""
        return self._by_edge.get(edge, {})

    def __contains__(self, vehicle: int) -> bool:
        return vehicle in self._plans

    def __len__(self) -> int:
        return len(self._plans)

    def __iter__(self):
        return iter(sorted(self._plans))


def monitor_adjacent_flow(log: EntryLog, edge: EdgeKey, arrival: float, dt: float, self_vehicle: int) -> float:
    """Observed flow on the edge the vehicle is about to enter."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    others = log.count_in(edge, arrival - dt, arrival + dt, exclude=self_vehicle)
    return (others + 1) / (2.0 * dt)


def estimate_future_flow(
    registry: PlanRegistry,
    network: RoadNetwork,
    edge: EdgeKey,
    est_arrival: float,
    dt: float,
    self_vehicle: int,
) -> float:
    """Anticipated flow on a downstream edge from other vehicles' plans."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    lower, upper = est_arrival - dt, est_arrival + dt
    count = 0
    for vehicle, t in registry.vehicles_on(edge).items():
        if vehicle != self_vehicle and lower <= t <= upper:
            count += 1
    return (count + 1) / (2.0 * dt)


@dataclass(frozen=True)
class RouteRollout:
    route: Route
    entry_times: tuple[float, ...]
    flows: tuple[float, ...]
    travel_times: tuple[float, ...]
    total: float

    @property
    def arrival(self) -> float:
        if not self.entry_times:
            return 0.0
        return self.entry_times[-1] + self.travel_times[-1]


def rollout_route(
    network: RoadNetwork,
    log: EntryLog,
    registry: PlanRegistry,
    route: Route,
    start: float,
    dt: float,
    self_vehicle: int,
) -> RouteRollout:
    """Estimated entry times, flows and travel times along ``route``.

    The first edge uses the monitored flow, later edges the flow anticipated
    from registered plans at the estimated entry time.
    """
    edges = route.edges
    if not edges:
        raise ValueError("cannot roll out an empty route")
    if not route.is_simple():
        raise NetworkError(f"route {route.nodes} repeats a node")
    alpha, beta = network.bpr_alpha, network.bpr_beta
    entries, flows, taus = [], [], []
    t = start
    total = 0.0
    for s, key in enumerate(edges):
        if s == 0:
            f = monitor_adjacent_flow(log, key, t, dt, self_vehicle)
        else:
            f = estimate_future_flow(registry, network, key, t, dt, self_vehicle)
        edge = network.edges.get(key)
        if edge is None:
            raise NetworkError(f"edge {key} not in network")
        tau = bpr_travel_time(edge, f, alpha, beta)
        entries.append(t)
        flows.append(f)
        taus.append(tau)
        total += tau
        t += tau
    return RouteRollout(route, tuple(entries), tuple(flows), tuple(taus), total)
