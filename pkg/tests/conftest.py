import itertools

import pytest

from equiroute.network import Edge, RoadNetwork

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


# -- independent oracles ---------------------------------------------------


def all_simple_paths(network: RoadNetwork, source: int, target: int):
    """Every simple path by depth-first enumeration."""
    out = []

    def walk(path):
        u = path[-1]
        if u == target:
            out.append(tuple(path))
            return
        for v in sorted(network.successors(u)):
            if v not in path:
                path.append(v)
                walk(path)
                path.pop()

    walk([source])
    return out


def path_weight(path, weights) -> float:
    total = 0.0
    for u, v in zip(path, path[1:]):
        total += weights[(u, v)]
    return total


def ranked_paths(network, weights, source, target):
    paths = all_simple_paths(network, source, target)
    return sorted(paths, key=lambda p: (path_weight(p, weights), p))


def brute_gini(values) -> float:
    n = len(values)
    mean = sum(values) / n
    total = 0.0
    for a, b in itertools.product(values, repeat=2):
        total += abs(a - b)
    return total / (2 * n * n * mean)


# -- fixtures -----------------------------------------------------------------


@pytest.fixture
def triangle():
    """A->C directly (5) or via B (2 + 2); A=0, B=1, C=2."""
    return RoadNetwork.from_edges(
        [Edge(0, 2, 5.0), Edge(0, 1, 2.0), Edge(1, 2, 2.0)],
        origins=(0,),
        destinations=(2,),
    )


def parallel_chains(count: int = 3, length: int = 4, free_flow_time: float = 1.0) -> RoadNetwork:
    """``count`` node-disjoint chains; chain ``c`` runs from ``c*length`` to ``c*length + length - 1``."""
    edges = []
    for c in range(count):
        base = c * length
        edges += [Edge(base + i, base + i + 1, free_flow_time) for i in range(length - 1)]
    return RoadNetwork.from_edges(
        edges,
        origins=tuple(c * length for c in range(count)),
        destinations=tuple(c * length + length - 1 for c in range(count)),
    )
