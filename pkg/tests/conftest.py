"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from adaptive_bfs.graph import Graph, build_combined

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# Verdict lines appended by the acceptance suite, echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_graph(pairs: list[tuple[int, int]], vertex_count: int | None = None) -> Graph:
    """Build a combined-representation graph from explicit edge pairs."""
    if vertex_count is None:
        vertex_count = max((max(s, d) for s, d in pairs), default=-1) + 1
        vertex_count = max(vertex_count, 1)
    arr = np.array(pairs, dtype=np.uint32).reshape(-1, 2)
    return build_combined(arr, vertex_count)


def random_graph(rng: np.random.Generator, n: int, m: int) -> Graph:
    """Uniform random directed multigraph with n vertices and m edges."""
    pairs = rng.integers(0, n, size=(m, 2), dtype=np.uint32)
    return build_combined(pairs, n)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260819)
