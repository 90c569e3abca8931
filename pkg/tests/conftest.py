import numpy as np
import pytest

from spectral_metrics import SpectrumGrid, sample_rational, theta_grid
from spectral_metrics.specs import BUILTINS

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def ma1(n):
    """|1 - 0.5 e^{j theta}|^2."""
    return SpectrumGrid(np.abs(1 - 0.5 * np.exp(1j * theta_grid(n))) ** 2)


def ar1(n):
    """1 / |1 - 0.5 e^{j theta}|^2."""
    return SpectrumGrid(1.0 / ma1(n).values)


def ones(n):
    return SpectrumGrid(np.ones(n))


def paper(name, n):
    return sample_rational(BUILTINS[name], n)


@pytest.fixture(scope="session")
def paper_spectra():
    return {k: paper(k, 4096) for k in BUILTINS}


def random_grid(rng, n=256, scale=1.0):
    return SpectrumGrid(np.exp(scale * rng.standard_normal(n)))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
