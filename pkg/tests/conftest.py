import math

import numpy as np
import pytest

from lattice_cpwl import lattice

ACCEPTANCE_LINES: list[str] = []


def random_specs(n, seed, T=1.0):
    """``n`` random nondegenerate lattices (|sin delta| >= 0.2)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        t1, d = rng.uniform(0.0, 2.0 * math.pi, 2)
        if abs(math.sin(d)) < 0.2:
            continue
        out.append(lattice.build_grid(t1, t1 + d, T))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    monkeypatch.setenv("LATTICE_CPWL_BACKEND", request.param)
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
