"""Trip-quality index (DTX) and Gini-based trip equity (DTE).

A traveler's DTX blends three normalised scores, each in (0, 1]:
efficiency ``tau_min / tau``, cost ``phi_min / phi`` and convenience
``q_min / q``. DTE is one minus the Gini coefficient of the DTX values of a
group of travelers, where a shared vehicle contributes one copy per occupant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .flow import PlanRegistry, RouteRollout
from .network import RoadNetwork
from .paths import CandidateSet, shortest_route

MODES = ("private", "autonomous", "ride_hailing")
MINUTES_PER_HOUR = 60.0


class ModeError(ValueError):
    pass


@dataclass(frozen=True)
class ModeParams:
    """Economics and convenience constants of one vehicle type.

    ``T_w`` is in minutes and ``T_d`` in hours, as they are usually quoted;
    :attr:`q` converts both to minutes.
    """

    xi1: float
    xi2: float
    xi3: float
    epsilon: float  # $/min per traveler
    T_w: float  # min
    T_d: float  # h
    occupancy: int = 1

    def __post_init__(self):
        if abs(self.xi1 + self.xi2 + self.xi3 - 1.0) > 1e-12:
            raise ModeError(f"weights must sum to 1, got {self.xi1 + self.xi2 + self.xi3!r}")
        if min(self.xi1, self.xi2, self.xi3) < 0:
            raise ModeError("weights must be non-negative")
        for name in ("epsilon", "T_w", "T_d", "occupancy"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ModeError(f"{name} must be positive, got {val!r}")

    @property
    def q(self) -> float:
        return self.T_w / (self.T_d * MINUTES_PER_HOUR)


@dataclass(frozen=True)
class ModeTable:
    private: ModeParams
    autonomous: ModeParams
    ride_hailing: ModeParams

    def __getitem__(self, mode: str) -> ModeParams:
        if mode not in MODES:
            raise KeyError(mode)
        return getattr(self, mode)

    def items(self):
        return [(m, self[m]) for m in MODES]

    @property
    def epsilon_min(self) -> float:
        return min(p.epsilon for _, p in self.items())

    @property
    def T_w_min(self) -> float:
        return min(p.T_w for _, p in self.items())

    @property
    def T_d_max(self) -> float:
        return max(p.T_d for _, p in self.items())

    @property
    def q_min(self) -> float:
        return self.T_w_min / (self.T_d_max * MINUTES_PER_HOUR)

    def with_occupancy(self, m: int) -> ModeTable:
        return replace(self, ride_hailing=replace(self.ride_hailing, occupancy=m))


# Parameter settings per vehicle type used in the reference study.
TABLE1 = ModeTable(
    private=ModeParams(0.4, 0.4, 0.2, epsilon=0.27, T_w=2, T_d=24),
    autonomous=ModeParams(0.4, 0.4, 0.2, epsilon=0.1485, T_w=15, T_d=18),
    ride_hailing=ModeParams(0.4, 0.4, 0.2, epsilon=0.1536, T_w=6, T_d=12, occupancy=2),
)


@dataclass(frozen=True)
class TripMinima:
    tau_min: float
    phi_min: float
    q_min: float

    @property
    def degenerate(self) -> bool:
        return self.tau_min == 0


@dataclass(frozen=True)
class DtxScore:
    value: float
    efficiency: float
    cost: float
    convenience: float


@dataclass(frozen=True)
class EquityReport:
    dtx_multiset: tuple[float, ...]
    mean: float
    dte: float

    @property
    def gini(self) -> float:
        return 1.0 - self.dte


def trip_minima(network: RoadNetwork, origin: int, dest: int, modes: ModeTable) -> TripMinima:
    route = shortest_route(network, network.free_flow_weights(), origin, dest)
    tau = 0.0
    for key in route.edges:
        tau += network.edges[key].free_flow_time
    return TripMinima(tau, modes.epsilon_min * tau, modes.q_min)


def dtx_from_time(tau: float, minima: TripMinima, mode: ModeParams) -> DtxScore:
    """DTX for a trip whose total (experienced + expected) time is ``tau``."""
    if tau == 0:
        eff = cost = 1.0
    else:
        eff = minima.tau_min / tau
        cost = minima.phi_min / (mode.epsilon * tau)
    conv = minima.q_min / mode.q
    return DtxScore(mode.xi1 * eff + mode.xi2 * cost + mode.xi3 * conv, eff, cost, conv)


def dtx(state, minima: TripMinima, mode: ModeParams, rollout: RouteRollout | None, now: float) -> DtxScore:
    """DTX of an en-route vehicle at ``now``.

    The trip time is the time already spent since departure plus the
    estimated time of the remaining route from ``rollout``.
    """
    remaining = rollout.total if rollout is not None else 0.0
    return dtx_from_time((now - state.departure) + remaining, minima, mode)


def competitors(subject: int, candidate_routes: CandidateSet | Iterable, registry: PlanRegistry) -> set[int]:
    """Vehicles whose registered plan shares an edge with any candidate."""
    if isinstance(candidate_routes, CandidateSet):
        edges = candidate_routes.edge_union
    else:
        edges = {e for r in candidate_routes for e in r.edges}
    out = {subject}
    for e in edges:
        out.update(registry.vehicles_on(e))
    return out


def gini(values: Sequence[float] | np.ndarray) -> float:
    """Gini coefficient of positive values, via sorted gaps.

    ``sum_ij |x_i - x_j| = 2 * sum_k k (n - k) (x_(k+1) - x_(k))`` keeps every
    term non-negative, so the result is exactly 0 only for equal values.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("empty multiset")
    if n == 1 or x[0] == x[-1]:
        return 0.0
    k = np.arange(1, n, dtype=float)
    pair_sum = 2.0 * math.fsum(k * (n - k) * np.diff(x))
    return pair_sum / (2.0 * n * math.fsum(x))


def expand_multiset(entries: Iterable[tuple[float, int]]) -> np.ndarray:
    vals, reps = [], []
    for v, m in entries:
        vals.append(v.value if isinstance(v, DtxScore) else v)
        reps.append(m)
    return np.repeat(np.asarray(vals, dtype=float), np.asarray(reps, dtype=int))


def dte(report_input: Iterable[tuple[DtxScore | float, int]]) -> EquityReport:
    """Equity over (DTX, occupancy) pairs, each repeated ``occupancy`` times."""
    values = expand_multiset(report_input)
    if values.size == 0:
        raise ValueError("dte needs at least one traveler")
    if not np.all(values > 0):
        raise ValueError("DTX values must be positive")
    g = gini(values)
    return EquityReport(tuple(values.tolist()), float(values.mean()), 1.0 - g)


def free_flow_dtx(mode: ModeParams, modes: ModeTable) -> DtxScore:
    cost = modes.epsilon_min / mode.epsilon
    conv = modes.q_min / mode.q
    return DtxScore(mode.xi1 + mode.xi2 * cost + mode.xi3 * conv, 1.0, cost, conv)


@dataclass(frozen=True)
class EquityCheck:
    holds: bool
    gap: float
    tolerance: float
    values: Mapping[str, float] = field(default_factory=dict)


def check_perfect_equity(modes: ModeTable, tol: float = 1e-3) -> EquityCheck:
    """Whether all modes reach the same free-flow DTX within ``tol``."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    values = {m: free_flow_dtx(p, modes).value for m, p in modes.items()}
    vs = list(values.values())
    gap = max(abs(a - b) for a in vs for b in vs)
    return EquityCheck(gap <= tol, gap, tol, values)
