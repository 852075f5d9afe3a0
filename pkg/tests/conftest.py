import numpy as np
import pytest

from qent.model import Geometry

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def quarter():
    """L=8 with two-site A and B, so x1 = x2 = 1/4."""
    return Geometry(8, 2, 0, 2)


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    x = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return x @ x.conj().T


def random_density(rng, n, rank=None):
    m = random_psd(rng, n, rank)
    return m / np.trace(m).real
