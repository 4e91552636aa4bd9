"""Directed road graph, free-flow attributes and the BPR volume-delay curve."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

DEFAULT_ALPHA = 0.15
DEFAULT_BETA = 4.0
DEFAULT_CAPACITY = 5.0  # veh/min/lane


class NetworkError(ValueError):
    """Malformed network data or an invalid route."""


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    free_flow_time: float  # minutes
    capacity: float = DEFAULT_CAPACITY  # veh/min per lane
    lanes: int = 1

    @property
    def key(self) -> tuple[int, int]:
        return (self.source, self.target)

    @property
    def effective_capacity(self) -> float:
        return self.capacity * self.lanes


@dataclass(frozen=True, order=True)
class Route:
    """A path given by its node sequence.

    ``Route((v,))`` and ``Route(())`` are both empty routes with no edges.
    """

    nodes: tuple[int, ...]

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.nodes, self.nodes[1:]))

    @property
    def origin(self) -> int:
        return self.nodes[0]

    @property
    def destination(self) -> int:
        return self.nodes[-1]

    def __len__(self) -> int:
        return max(len(self.nodes) - 1, 0)

    def is_simple(self) -> bool:
        return len(set(self.nodes)) == len(self.nodes)

    def concat(self, other: Route) -> Route:
        if not self.nodes:
            return other
        if not other.nodes:
            return self
        if self.nodes[-1] != other.nodes[0]:
            raise NetworkError("routes do not chain")
        return Route(self.nodes + other.nodes[1:])


@dataclass
class RoadNetwork:
    """Immutable-by-convention directed graph.

    The constructor does not enforce the graph invariants so that broken
    inputs can still be inspected by :func:`validate_network`; loaders
    validate before returning.
    """

    nodes: frozenset[int]
    edges: dict[tuple[int, int], Edge]
    origins: tuple[int, ...] = ()
    destinations: tuple[int, ...] = ()
    bpr_alpha: float = DEFAULT_ALPHA
    bpr_beta: float = DEFAULT_BETA
    coords: dict[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.nodes = frozenset(self.nodes)
        self.origins = tuple(self.origins)
        self.destinations = tuple(self.destinations)
        succ: dict[int, list[int]] = {}
        pred: dict[int, list[int]] = {}
        for u, v in self.edges:
            succ.setdefault(u, []).append(v)
            pred.setdefault(v, []).append(u)
        self._succ = {u: tuple(sorted(vs)) for u, vs in succ.items()}
        self._pred = {v: tuple(sorted(us)) for v, us in pred.items()}

    @classmethod
    def from_edges(cls, edges: Iterable[Edge], nodes: Iterable[int] | None = None, **kw) -> RoadNetwork:
        table: dict[tuple[int, int], Edge] = {}
        for e in edges:
            if e.key in table:
                raise NetworkError(f"parallel edge {e.key}")
            table[e.key] = e
        if nodes is None:
            nodes = {n for key in table for n in key}
        return cls(frozenset(nodes), table, **kw)

    def successors(self, node: int) -> tuple[int, ...]:
        return self._succ.get(node, ())

    def predecessors(self, node: int) -> tuple[int, ...]:
        return self._pred.get(node, ())

    def edge(self, u: int, v: int) -> Edge:
        try:
            return self.edges[(u, v)]
        except KeyError:
            raise NetworkError(f"edge {(u, v)} not in network") from None

    def free_flow_weights(self) -> dict[tuple[int, int], float]:
        return {k: e.free_flow_time for k, e in self.edges.items()}

    @property
    def max_free_flow_time(self) -> float:
        return max((e.free_flow_time for e in self.edges.values()), default=0.0)

    def reachable_from(self, source: int) -> set[int]:
        seen = {source}
        todo = deque([source])
        while todo:
            u = todo.popleft()
            for v in self.successors(u):
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return seen

    def check_route(self, route: Route) -> None:
        for u, v in route.edges:
            if (u, v) not in self.edges:
                raise NetworkError(f"edge {(u, v)} not in network")
        if not route.is_simple():
            raise NetworkError(f"route {route.nodes} repeats a node")

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        nodes = []
        for n in sorted(self.nodes):
            entry: dict = {"id": n}
            if n in self.coords:
                entry["x"], entry["y"] = self.coords[n]
            nodes.append(entry)
        return {
            "nodes": nodes,
            "edges": [
                {
                    "from": e.source,
                    "to": e.target,
                    "free_flow_time_min": e.free_flow_time,
                    "capacity_veh_per_min_per_lane": e.capacity,
                    "lanes": e.lanes,
                }
                for _, e in sorted(self.edges.items())
            ],
            "origins": list(self.origins),
            "destinations": list(self.destinations),
            "bpr": {"alpha": self.bpr_alpha, "beta": self.bpr_beta},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> RoadNetwork:
        try:
            nodes = []
            coords = {}
            for item in doc["nodes"]:
                nid = int(item["id"]) if isinstance(item, dict) else int(item)
                nodes.append(nid)
                if isinstance(item, dict) and "x" in item and "y" in item:
                    coords[nid] = (float(item["x"]), float(item["y"]))
            if len(set(nodes)) != len(nodes):
                raise NetworkError("duplicate node id")
            edges = [_edge_from_dict(i, item) for i, item in enumerate(doc["edges"])]
            bpr = doc.get("bpr", {})
            net = cls.from_edges(
                edges,
                nodes=nodes,
                origins=tuple(int(o) for o in doc["origins"]),
                destinations=tuple(int(d) for d in doc["destinations"]),
                bpr_alpha=float(bpr.get("alpha", DEFAULT_ALPHA)),
                bpr_beta=float(bpr.get("beta", DEFAULT_BETA)),
                coords=coords,
            )
        except KeyError as exc:
            raise NetworkError(f"missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, NetworkError):
                raise
            raise NetworkError(str(exc)) from None
        return net

    @classmethod
    def load(cls, path: str | Path) -> RoadNetwork:
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise NetworkError(f"network file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise NetworkError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        return cls.from_dict(doc)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")


def _edge_from_dict(index: int, item: dict) -> Edge:
    if "free_flow_time_min" in item:
        tau0 = float(item["free_flow_time_min"])
    elif "length_m" in item and "speed_kmh" in item:
        tau0 = free_flow_time_from_length(float(item["length_m"]), float(item["speed_kmh"]))
    else:
        raise NetworkError(f"edges[{index}]: need free_flow_time_min or length_m + speed_kmh")
    return Edge(
        int(item["from"]),
        int(item["to"]),
        tau0,
        float(item.get("capacity_veh_per_min_per_lane", DEFAULT_CAPACITY)),
        int(item.get("lanes", 1)),
    )


def free_flow_time_from_length(length_m: float, speed_kmh: float) -> float:
    """Minutes to cover ``length_m`` at ``speed_kmh``."""
    if speed_kmh <= 0:
        raise NetworkError("speed must be positive")
    return length_m / (speed_kmh * 1000.0 / 60.0)


def bpr_travel_time(edge: Edge, flow: float, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA) -> float:
    """Congested traversal time ``tau0 * (1 + alpha * (flow / capacity) ** beta)``.

    ``flow`` is in veh/min and is compared with the lane-scaled capacity.
    """
    if not math.isfinite(flow) or flow < 0:
        raise ValueError(f"flow must be finite and non-negative, got {flow!r}")
    if flow == 0:
        return edge.free_flow_time
    return edge.free_flow_time * (1.0 + alpha * (flow / edge.effective_capacity) ** beta)


def free_flow_route_time(network: RoadNetwork, route: Route | Sequence[int]) -> float:
    nodes = route.nodes if isinstance(route, Route) else tuple(route)
    total = 0.0
    for u, v in zip(nodes, nodes[1:]):
        total += network.edge(u, v).free_flow_time
    return total


@dataclass(frozen=True)
class Finding:
    kind: str  # "dangling endpoint" | "unreachable" | "non-positive attribute" | ...
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


def validate_network(network: RoadNetwork) -> list[Finding]:
    """Diagnose invariant violations. An empty list means the network is sound."""
    out: list[Finding] = []
    for (u, v), e in sorted(network.edges.items()):
        for end in (u, v):
            if end not in network.nodes:
                out.append(Finding("dangling endpoint", f"edge {u}->{v} references missing node {end}"))
        if u == v:
            out.append(Finding("self loop", f"edge {u}->{v}"))
        if (e.source, e.target) != (u, v):
            out.append(Finding("inconsistent key", f"edge stored under {(u, v)} is {e.key}"))
        for name in ("free_flow_time", "capacity"):
            val = getattr(e, name)
            if not (math.isfinite(val) and val > 0):
                out.append(Finding("non-positive attribute", f"edge {u}->{v} {name}={val}"))
        if e.lanes < 1:
            out.append(Finding("non-positive attribute", f"edge {u}->{v} lanes={e.lanes}"))
    for kind, group in (("origin", network.origins), ("destination", network.destinations)):
        for n in group:
            if n not in network.nodes:
                out.append(Finding("dangling endpoint", f"{kind} {n} is not a node"))
    if not network.origins:
        out.append(Finding("empty set", "no origins"))
    if not network.destinations:
        out.append(Finding("empty set", "no destinations"))
    for o in network.origins:
        if o not in network.nodes:
            continue
        seen = network.reachable_from(o)
        for d in network.destinations:
            if d in network.nodes and d not in seen:
                out.append(Finding("unreachable", f"destination {d} unreachable from origin {o}"))
    return out


def iter_edges(network: RoadNetwork, route: Route) -> Iterator[Edge]:
    for key in route.edges:
        yield network.edge(*key)
