import numpy as np
import pytest

from colorhomography import SynthConfig, generate


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_map(rng, max_cond=20.0):
    """Well-conditioned invertible 3x3 map near the identity."""
    while True:
        M = np.eye(3) + rng.uniform(-0.3, 0.3, size=(3, 3))
        if np.linalg.cond(M) < max_cond:
            return M


@pytest.fixture
def clean_instance():
    return generate(SynthConfig(n_patches=24, seed=7, shading_range=(0.2, 1.0)))


ACCEPTANCE_RESULTS = []


def record_criterion(number, title, passed, detail=""):
    ACCEPTANCE_RESULTS.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} {detail}".rstrip())
