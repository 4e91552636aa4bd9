"""Equity-aware dynamic route guidance on congestible road networks."""

from .equity import TABLE1, ModeParams, ModeTable, check_perfect_equity, dte, free_flow_dtx, gini
from .network import Edge, RoadNetwork, Route, bpr_travel_time, free_flow_route_time, validate_network
from .paths import k_shortest_routes, shortest_route
from .sim import ScenarioConfig, generate_scenario, run

__all__ = [
    "TABLE1",
    "Edge",
    "ModeParams",
    "ModeTable",
    "RoadNetwork",
    "Route",
    "ScenarioConfig",
    "bpr_travel_time",
    "check_perfect_equity",
    "dte",
    "free_flow_dtx",
    "free_flow_route_time",
    "generate_scenario",
    "gini",
    "k_shortest_routes",
    "run",
    "shortest_route",
    "validate_network",
]
