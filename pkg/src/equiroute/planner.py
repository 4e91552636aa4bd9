"""Route selection: equity-maximising guidance and shortest-route baselines."""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .equity import ModeTable, competitors, dtx_from_time, gini
from .flow import EntryLog, PlanRegistry, RouteRollout, rollout_route
from .network import RoadNetwork, Route
from .paths import DEFAULT_L, CandidateCache, CandidateSet

STRATEGIES = ("psr", "dsr", "equity")


@dataclass(frozen=True)
class WorldSnapshot:
    """Read-only view of the simulation at one instant.

    The referenced log and registry are owned by the event loop and are not
    mutated while a planner runs.
    """

    network: RoadNetwork
    log: EntryLog
    registry: PlanRegistry
    modes: ModeTable
    now: float
    dt: float
    vehicles: Mapping[int, object] = field(default_factory=dict)
    cache: CandidateCache | None = None
    executor: Executor | None = None

    def candidates(self, source: int, target: int, L: int) -> CandidateSet:
        cache = self.cache or CandidateCache(self.network)
        return cache.candidates(source, target, L)


@dataclass(frozen=True)
class CandidateScore:
    route: Route
    objective: float
    remaining: float  # estimated (dsr, equity) or free-flow (psr) minutes


@dataclass(frozen=True)
class PlanningDecision:
    route: Route
    objective: float
    scores: tuple[CandidateScore, ...]
    competitors: tuple[int, ...] = ()

    def __post_init__(self):
        chosen = [s for s in self.scores if s.route == self.route]
        if not chosen or chosen[0].objective != self.objective:
            raise AssertionError("decision does not match its candidate scores")


def _map(world: WorldSnapshot, fn, items):
    if world.executor is None:
        return [fn(x) for x in items]
    return list(world.executor.map(fn, items))


def _rollouts(vehicle, world: WorldSnapshot, cands: CandidateSet) -> list[RouteRollout]:
    def roll(route: Route) -> RouteRollout:
        return rollout_route(world.network, world.log, world.registry, route, world.now, world.dt, vehicle.id)

    return _map(world, roll, cands.routes)


def plan_psr(vehicle, network: RoadNetwork, cache: CandidateCache | None = None) -> PlanningDecision:
    """Free-flow shortest route from the vehicle's current node."""
    cache = cache or CandidateCache(network)
    cands = cache.candidates(vehicle.location, vehicle.destination, 1)
    route, cost = cands.routes[0], cands.costs[0]
    return PlanningDecision(route, cost, (CandidateScore(route, cost, cost),))


def plan_dsr(vehicle, world: WorldSnapshot, L: int = DEFAULT_L) -> PlanningDecision:
    """Candidate with the smallest estimated remaining time."""
    cands = world.candidates(vehicle.location, vehicle.destination, L)
    rolls = _rollouts(vehicle, world, cands)
    scores = tuple(CandidateScore(r.route, r.total, r.total) for r in rolls)
    best = min(scores, key=lambda s: (s.objective, s.route.nodes))
    return PlanningDecision(best.route, best.objective, scores)


def competitor_dtx(world: WorldSnapshot, vehicle_id: int) -> tuple[float, int]:
    """(DTX, occupancy) of a competitor from its registered plan.

    Its trip time is the time spent until it reached the head of its plan
    plus the free-flow time of the plan.
    """
    v = world.vehicles[vehicle_id]
    plan = world.registry.get(vehicle_id)
    mode = world.modes[v.mode]
    tau = (plan.head_time - v.departure) + plan.free_flow_remaining
    return dtx_from_time(tau, v.minima, mode).value, mode.occupancy


def plan_equity(vehicle, world: WorldSnapshot, L: int = DEFAULT_L) -> PlanningDecision:
    """Candidate that maximises trip equity among the vehicle's competitors."""
    cands = world.candidates(vehicle.location, vehicle.destination, L)
    rivals = sorted(c for c in competitors(vehicle.id, cands, world.registry) if c != vehicle.id)
    if not rivals:
        route = cands.routes[0]
        return PlanningDecision(route, 1.0, (CandidateScore(route, 1.0, cands.costs[0]),))

    values, reps = [], []
    for j in rivals:
        val, m = competitor_dtx(world, j)
        values.append(val)
        reps.append(m)
    others = np.repeat(np.asarray(values), np.asarray(reps))
    mode = world.modes[vehicle.mode]
    elapsed = world.now - vehicle.departure
    buf = np.empty(others.size + mode.occupancy)
    buf[: others.size] = others

    def score(roll: RouteRollout) -> CandidateScore:
        own = dtx_from_time(elapsed + roll.total, vehicle.minima, mode).value
        arr = buf.copy()
        arr[others.size :] = own
        return CandidateScore(roll.route, 1.0 - gini(arr), roll.total)

    scores = tuple(_map(world, score, _rollouts(vehicle, world, cands)))
    best = min(scores, key=lambda s: (-s.objective, s.remaining, s.route.nodes))
    return PlanningDecision(best.route, best.objective, scores, tuple(rivals))

