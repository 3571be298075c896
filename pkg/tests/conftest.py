import numpy as np
import pytest

from patms import DetectorRing, Grid2D, TimeGrid
from patms.wave import WaveOperator


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tiny():
    """8x8 physical grid with a 16-detector ring; small enough for dense oracles."""
    grid = Grid2D(8)
    ring = DetectorRing(16)
    time = TimeGrid(32, grid.spacing)
    return grid, ring, time, WaveOperator(grid, ring, time)


@pytest.fixture(scope="session")
def tiny_dense(tiny):
    from patms import dense_forward_matrix
    grid, ring, time, _ = tiny
    return dense_forward_matrix(grid, ring, time)


def pytest_configure(config):
    config._criterion_lines = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    def report(number: int, passed: bool, detail: str):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        request.config._criterion_lines.append(line)
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_criterion_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
