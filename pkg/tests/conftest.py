import numpy as np
import pytest

from pckit import SPEED_OF_LIGHT
from pckit.farfield import Wavenumber
from pckit.geometry import Direction, select_region
from pckit.grid import SphericalGrid

PAPER_WAVELENGTH = 0.0414
PAPER_FREQUENCY = 7.25e9


@pytest.fixture(scope="session")
def grid():
    return SphericalGrid(1.0)


@pytest.fixture(scope="session")
def wavelength():
    return SPEED_OF_LIGHT / PAPER_FREQUENCY


@pytest.fixture(scope="session")
def k(wavelength):
    return Wavenumber.from_wavelength(wavelength)


@pytest.fixture(scope="session")
def region(grid):
    return select_region(grid, Direction(20.0, 60.0), 20.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    """Remember one acceptance verdict for the end-of-run summary."""
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
