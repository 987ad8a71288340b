import pytest

from triadgraph.engine import GrowthGraph, ModelParams

ACCEPTANCE_LINES: list[str] = []

# 0-indexed edge lists of small hand-checkable graphs
K3 = [(0, 1), (0, 2), (1, 2)]
PATH3 = [(0, 1), (0, 2)]  # centre 0, leaves 1 and 2
STAR3 = [(0, 1), (0, 2), (0, 3)]
K3_PENDANT = [(0, 1), (0, 2), (1, 2), (0, 3)]


def make_graph(edges, alpha=0.5, delta=0.0, mode="edge_choice"):
    from triadgraph.metrics import triangle_counts

    n = max(max(e) for e in edges) + 1
    return GrowthGraph.from_edges(ModelParams(alpha, delta, mode), edges, triangle_counts(n, edges))


@pytest.fixture
def k3():
    return make_graph(K3)


@pytest.fixture
def path3():
    return make_graph(PATH3)


@pytest.fixture
def star3():
    return make_graph(STAR3)


@pytest.fixture
def k3_pendant():
    return make_graph(K3_PENDANT)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
