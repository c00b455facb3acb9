import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from thzrestore.cube_io import SpectralCube

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_cube(rng):
    return SpectralCube(rng.uniform(0.0, 1.0, size=(8, 6, 5)), df=0.1, f_start=0.2)


_VERDICTS = "acceptance_verdicts"


@pytest.fixture
def verdict(request):
    """Record one acceptance criterion line; returns whether it passed."""
    lines = request.config.__dict__.setdefault(_VERDICTS, [])

    def record(number, title, ok, detail):
        line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get(_VERDICTS)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
