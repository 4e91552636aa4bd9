"""Synthetic road networks: line, grid and a downtown-style preset."""

from __future__ import annotations

import numpy as np

from .network import DEFAULT_CAPACITY, Edge, RoadNetwork, free_flow_time_from_length

FREE_FLOW_SPEED_KMH = 27.0


def line_network(n: int = 3, free_flow_time: float = 1.0, capacity: float = DEFAULT_CAPACITY, lanes: int = 1) -> RoadNetwork:
    """Nodes ``0 -> 1 -> ... -> n-1``; origin 0, destination n-1."""
    if n < 2:
        raise ValueError("a line needs at least 2 nodes")
    edges = [Edge(i, i + 1, free_flow_time, capacity, lanes) for i in range(n - 1)]
    return RoadNetwork.from_edges(
        edges,
        nodes=range(n),
        origins=(0,),
        destinations=(n - 1,),
        coords={i: (float(i), 0.0) for i in range(n)},
    )


def _grid_edges(cols, rows, length_of, speed_kmh, capacity, lanes_of):
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            for dc, dr in ((1, 0), (0, 1)):
                cc, rr = c + dc, r + dr
                if cc >= cols or rr >= rows:
                    continue
                v = rr * cols + cc
                length = length_of(u, v)
                lanes = lanes_of(u, v)
                tau0 = free_flow_time_from_length(length, speed_kmh)
                edges.append(Edge(u, v, tau0, capacity, lanes))
                edges.append(Edge(v, u, tau0, capacity, lanes))
    return edges


def grid_network(
    cols: int = 3,
    rows: int = 3,
    block_m: float = 250.0,
    speed_kmh: float = FREE_FLOW_SPEED_KMH,
    capacity: float = DEFAULT_CAPACITY,
    lanes: int = 1,
) -> RoadNetwork:
    """``cols x rows`` intersections joined by bidirectional edge pairs.

    The west column holds the origins and the east column the destinations.
    """
    if cols < 1 or rows < 1 or cols * rows < 2:
        raise ValueError("grid needs positive dimensions and at least 2 nodes")
    edges = _grid_edges(cols, rows, lambda u, v: block_m, speed_kmh, capacity, lambda u, v: lanes)
    n = cols * rows
    return RoadNetwork.from_edges(
        edges,
        nodes=range(n),
        origins=tuple(r * cols for r in range(rows)),
        destinations=tuple(r * cols + cols - 1 for r in range(rows)),
        coords={r * cols + c: (c * block_m, r * block_m) for r in range(rows) for c in range(cols)},
    )


def boston_like(
    cols: int = 9,
    rows: int = 5,
    block_m: float = 250.0,
    jitter: float = 0.15,
    speed_kmh: float = FREE_FLOW_SPEED_KMH,
    capacity: float = DEFAULT_CAPACITY,
    seed: int = 2025,
) -> RoadNetwork:
    """Grid of 45 intersections plus 8 origin and 5 destination stubs.

    Origins feed the western and outer edges of the grid and destinations
    sit on the eastern (downtown) side, so most trips cross the grid. Block
    lengths are jittered with a fixed seed to break Manhattan ties.
    """
    rng = np.random.default_rng(seed)
    n = cols * rows
    lengths = {}

    def length_of(u, v):
        key = (min(u, v), max(u, v))
        if key not in lengths:
            lengths[key] = block_m * (1.0 + jitter * rng.uniform(-1.0, 1.0))
        return lengths[key]

    edges = _grid_edges(cols, rows, length_of, speed_kmh, capacity, lambda u, v: 1)
    coords = {r * cols + c: (c * block_m, r * block_m) for r in range(rows) for c in range(cols)}

    west = [r * cols for r in range(rows)]
    north = [c for c in range(1, cols // 2)]
    origin_hosts = (west + north + [(rows - 1) * cols + 1, (rows - 1) * cols + 2])[:8]
    dest_hosts = [r * cols + cols - 1 for r in range(rows)]
    stub_tau = free_flow_time_from_length(block_m, speed_kmh)
    origins, destinations = [], []
    for host in origin_hosts:
        stub = n + len(origins)
        origins.append(stub)
        edges.append(Edge(stub, host, stub_tau, capacity, 1))
        x, y = coords[host]
        coords[stub] = (x - block_m / 2, y)
    for host in dest_hosts:
        stub = n + len(origin_hosts) + len(destinations)
        destinations.append(stub)
        edges.append(Edge(host, stub, stub_tau, capacity, 1))
        x, y = coords[host]
        coords[stub] = (x + block_m / 2, y)
    return RoadNetwork.from_edges(
        edges,
        nodes=range(n + len(origins) + len(destinations)),
        origins=tuple(origins),
        destinations=tuple(destinations),
        coords=coords,
    )
