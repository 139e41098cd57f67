import functools
import importlib

import numpy as np
import pytest

from threadtone import _fallback
from threadtone.chords import build_chord_space
from threadtone.image import make_region

try:
    _core = importlib.import_module("threadtone._core")
except ImportError:  # extension not built
    _core = None

BACKENDS = [pytest.param(_fallback, id="python")]
if _core is not None:
    BACKENDS.append(pytest.param(_core, id="compiled"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@functools.lru_cache(maxsize=None)
def small_space(shape="circle", radius=8, pins=8, s_min=1):
    return build_chord_space(make_region(shape, radius), pins, s_min)


@pytest.fixture
def toy_space():
    """8 pins on a 17x17 circle."""
    return small_space("circle", 8, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria report lines, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
