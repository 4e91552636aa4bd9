"""Shortest and L-shortest loopless route search.

Routes are ranked by ``(total weight, node sequence)``: the total weight is
the left-to-right sum of edge weights along the route and ties fall back to
lexicographic comparison of node ids, so every search is deterministic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .network import RoadNetwork, Route

Weights = Mapping[tuple[int, int], float]

DEFAULT_L = 7


class NoRouteError(LookupError):
    """The destination cannot be reached from the source."""


@dataclass(frozen=True)
class CandidateSet:
    routes: tuple[Route, ...]
    costs: tuple[float, ...]
    L: int

    def __len__(self) -> int:
        return len(self.routes)

    def __iter__(self):
        return iter(self.routes)

    @cached_property
    def edge_union(self) -> frozenset[tuple[int, int]]:
        return frozenset(e for r in self.routes for e in r.edges)


def route_weight(route: Route, weights: Weights) -> float:
    total = 0.0
    for key in route.edges:
        total += weights[key]
    return total


def _check_weights(weights: Weights) -> None:
    for key, w in weights.items():
        if not (math.isfinite(w) and w >= 0):
            raise ValueError(f"weight of {key} must be finite and >= 0, got {w!r}")


def _dijkstra(
    network: RoadNetwork,
    weights: Weights,
    source: int,
    target: int,
    start_cost: float = 0.0,
    prefix: tuple[int, ...] = (),
    banned_nodes: frozenset[int] | set[int] = frozenset(),
    banned_edges: frozenset | set = frozenset(),
) -> tuple[float, tuple[int, ...]] | None:
    """Cheapest ``prefix + path`` with lexicographic tie-break.

    Costs accumulate from ``start_cost`` so the returned value is exactly the
    left fold of the full route weight.
    """
    best: dict[int, tuple[float, tuple[int, ...]]] = {source: (start_cost, prefix + (source,))}
    heap = [(start_cost, prefix + (source,))]
    done: set[int] = set()
    while heap:
        cost, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        done.add(u)
        if u == target:
            return cost, path
        for v in network.successors(u):
            if v in done or v in banned_nodes or (u, v) in banned_edges:
                continue
            label = (cost + weights[(u, v)], path + (v,))
            old = best.get(v)
            if old is None or label < old:
                best[v] = label
                heapq.heappush(heap, label)
    return None


def shortest_route(network: RoadNetwork, weights: Weights, source: int, target: int) -> Route:
    for n in (source, target):
        if n not in network.nodes:
            raise NoRouteError(f"node {n} not in network")
    _check_weights(weights)
    found = _dijkstra(network, weights, source, target)
    if found is None:
        raise NoRouteError(f"no route {source} -> {target}")
    return Route(found[1])


def k_shortest_routes(network: RoadNetwork, weights: Weights, source: int, target: int, L: int = DEFAULT_L) -> CandidateSet:
    """Yen's algorithm for the ``L`` cheapest simple routes."""
    if L < 1:
        raise ValueError("L must be >= 1")
    for n in (source, target):
        if n not in network.nodes:
            raise NoRouteError(f"node {n} not in network")
    _check_weights(weights)
    first = _dijkstra(network, weights, source, target)
    if first is None:
        raise NoRouteError(f"no route {source} -> {target}")
    accepted: list[tuple[float, tuple[int, ...]]] = [first]
    pool: list[tuple[float, tuple[int, ...]]] = []
    seen = {first[1]}
    while len(accepted) < L:
        _, last = accepted[-1]
        root_cost = 0.0
        for i in range(len(last) - 1):
            root = last[: i + 1]
            spur = last[i]
            banned_edges = {(p[i], p[i + 1]) for _, p in accepted if len(p) > i + 1 and p[: i + 1] == root}
            found = _dijkstra(
                network,
                weights,
                spur,
                target,
                start_cost=root_cost,
                prefix=root[:-1],
                banned_nodes=set(root[:-1]),
                banned_edges=banned_edges,
            )
            if found is not None and found[1] not in seen:
                seen.add(found[1])
                heapq.heappush(pool, found)
            root_cost += weights[(last[i], last[i + 1])]
        if not pool:
            break
        accepted.append(heapq.heappop(pool))
    return CandidateSet(
        routes=tuple(Route(p) for _, p in accepted),
        costs=tuple(c for c, _ in accepted),
        L=L,
    )


class CandidateCache:
    """Memoised free-flow candidate sets keyed by (node, destination, L).

    Free-flow weights never change during a run, so candidates are a fixed
    structural property of the network.
    """

    def __init__(self, network: RoadNetwork):
        self.network = network
        self.weights = network.free_flow_weights()
        _check_weights(self.weights)
        self._sets: dict[tuple[int, int, int], CandidateSet] = {}

    def candidates(self, source: int, target: int, L: int) -> CandidateSet:
        key = (source, target, L)
        hit = self._sets.get(key)
        if hit is None:
            hit = k_shortest_routes(self.network, self.weights, source, target, L)
            self._sets[key] = hit
        return hit

    def shortest(self, source: int, target: int) -> Route:
        return self.candidates(source, target, 1).routes[0]

    @classmethod
    def for_network(cls, network: RoadNetwork) -> CandidateCache:
        """Cache shared by every run on the same network object."""
        cache = network.__dict__.get("_candidate_cache")
        if cache is None:
            cache = cls(network)
            network.__dict__["_candidate_cache"] = cache
        return cache
