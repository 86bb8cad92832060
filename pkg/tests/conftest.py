import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nnsp import build_graph, chain_graph_experiment, two_cluster_chain  # noqa: E402
from nnsp.experiments import chain_sampling_sets  # noqa: E402


@pytest.fixture(scope="session")
def chain():
    """The 100-node, 10-cluster chain with its two sampling sets."""
    graph, part, x = chain_graph_experiment()
    m1, m2 = chain_sampling_sets(graph, part, [2, 4])
    return graph, part, x, m1, m2


@pytest.fixture
def path3():
    graph, _ = build_graph([(1, 2, 2.0), (2, 3, 1.0)])
    return graph


@pytest.fixture
def two_chain():
    def make(delta, n=10):
        return two_cluster_chain(n, delta)

    return make


def ends(graph):
    return np.array([0, graph.n_nodes - 1])


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def accept():
    """Record one acceptance line, print it, and fail the test when not met."""

    def check(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
