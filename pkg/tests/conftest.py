import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from netbandit import Clustering, build_adjacency  # noqa: E402


@pytest.fixture
def pair_network():
    """Two disconnected edges: 0-1 and 2-3."""
    return build_adjacency(4, [(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)])


@pytest.fixture
def two_clusters():
    return Clustering([0, 0, 1, 1])


@pytest.fixture
def chain3():
    return build_adjacency(3, [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
