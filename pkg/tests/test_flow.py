import pytest
from hypothesis import given
from hypothesis import strategies as st

from equiroute.flow import (
    EntryLog,
    MonitorWindow,
    PlanRegistry,
    estimate_future_flow,
    in_window,
    monitor_adjacent_flow,
    rollout_route,
)
from equiroute.network import Edge, NetworkError, RoadNetwork, Route, bpr_travel_time
from equiroute.synthetic import line_network

E = (0, 1)


def log_with(times, edge=E):
    log = EntryLog()
    for i, t in enumerate(sorted(times)):
        log.append(100 + i, edge, t)
    return log


class TestWindow:
    def test_boundaries_inclusive(self):
        w = MonitorWindow(10.0, 1.0)
        assert in_window(9.0, w) and in_window(11.0, w)
        assert not in_window(8.999, w) and not in_window(11.001, w)

    def test_rejects_bad_width(self):
        with pytest.raises(ValueError):
            MonitorWindow(0.0, 0.0)


class TestMonitoredFlow:
    def test_alone(self):
        assert monitor_adjacent_flow(EntryLog(), E, 5.0, 1.0, 0) == 0.5

    def test_two_others(self):
        assert monitor_adjacent_flow(log_with([4.5, 5.0]), E, 5.0, 1.0, 0) == 1.5

    def test_boundary_entries_count(self):
        log = log_with([4.0, 6.0])
        assert monitor_adjacent_flow(log, E, 5.0, 1.0, 0) == 1.5

    def test_outside_window_ignored(self):
        log = log_with([3.99, 6.01])
        assert monitor_adjacent_flow(log, E, 5.0, 1.0, 0) == 0.5

    def test_own_entry_not_double_counted(self):
        log = EntryLog()
        log.append(0, E, 5.0)
        assert monitor_adjacent_flow(log, E, 5.0, 1.0, 0) == 0.5

    def test_other_edge_ignored(self):
        assert monitor_adjacent_flow(log_with([5.0], edge=(1, 2)), E, 5.0, 1.0, 0) == 0.5

    @given(st.integers(0, 30), st.sampled_from([0.25, 0.5, 1.0, 2.0]))
    def test_scales_with_half_width(self, others, dt):
        log = log_with([10.0] * others)
        assert monitor_adjacent_flow(log, E, 10.0, dt, 0) == (others + 1) / (2 * dt)


class TestEntryLog:
    def test_rejects_time_travel(self):
        log = log_with([5.0])
        with pytest.raises(ValueError):
            log.append(9, E, 4.0)

    def test_prune(self):
        log = log_with([1.0, 2.0, 3.0])
        log.prune(2.5)
        assert len(log) == 1
        assert log.count_in(E, 0.0, 10.0) == 1


class TestEstimatedFlow:
    def setup_method(self):
        self.net = line_network(4, free_flow_time=1.0)
        self.reg = PlanRegistry(self.net)

    def test_no_plans(self):
        assert estimate_future_flow(self.reg, self.net, (1, 2), 3.0, 1.0, 0) == 0.5

    def test_projected_entries(self):
        # vehicle 1 at node 0 at t=1 enters (1,2) at t=2 under free flow
        self.reg.register(1, Route((0, 1, 2, 3)), 1.0)
        self.reg.register(2, Route((1, 2, 3)), 3.0)
        assert self.reg.get(1).entry_times == (1.0, 2.0, 3.0)
        assert estimate_future_flow(self.reg, self.net, (1, 2), 3.0, 1.0, 0) == 1.5
        assert estimate_future_flow(self.reg, self.net, (1, 2), 4.5, 1.0, 0) == 0.5
        assert estimate_future_flow(self.reg, self.net, (1, 2), 3.0, 1.0, 2) == 1.0

    def test_reregistration_replaces(self):
        self.reg.register(1, Route((0, 1, 2, 3)), 0.0)
        self.reg.register(1, Route((2, 3)), 2.0)
        assert 1 not in self.reg.vehicles_on((0, 1))
        assert self.reg.vehicles_on((2, 3)) == {1: 2.0}
        self.reg.remove(1)
        assert len(self.reg) == 0 and self.reg.vehicles_on((2, 3)) == {}


class TestRollout:
    def test_empty_world(self):
        net = line_network(3, free_flow_time=1.0)
        roll = rollout_route(net, EntryLog(), PlanRegistry(net), Route((0, 1, 2)), 0.0, 1.0, 0)
        tau = bpr_travel_time(net.edge(0, 1), 0.5)
        assert roll.flows == (0.5, 0.5)
        assert roll.entry_times == (0.0, tau)
        assert roll.total == 2 * tau
        assert roll.arrival == 2 * tau

    def test_first_edge_monitored_later_estimated(self):
        net = RoadNetwork.from_edges([Edge(0, 1, 1.0, capacity=1.0), Edge(1, 2, 1.0, capacity=1.0)])
        log = log_with([0.0, 0.0, 0.0])  # three others just entered (0, 1)
        reg = PlanRegistry(net)
        reg.register(7, Route((1, 2)), 3.0)
        roll = rollout_route(net, log, reg, Route((0, 1, 2)), 0.0, 1.0, 0)
        assert roll.flows[0] == 2.0
        t1 = 1.0 * (1 + 0.15 * 2.0**4)
        assert roll.travel_times[0] == pytest.approx(t1, abs=1e-12)
        # vehicle 7's projected entry at 3.0 lies within [t1 - 1, t1 + 1]
        assert roll.flows[1] == 1.0
        assert roll.entry_times[1] == t1

    def test_empty_route(self):
        net = line_network(2)
        with pytest.raises(ValueError):
            rollout_route(net, EntryLog(), PlanRegistry(net), Route((0,)), 0.0, 1.0, 0)

    def test_foreign_edge(self):
        net = line_network(3)
        with pytest.raises(NetworkError):
            rollout_route(net, EntryLog(), PlanRegistry(net), Route((0, 2)), 0.0, 1.0, 0)
