import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from polydendrite import fixtures

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def vicsek():
    return fixtures.vicsek()


@pytest.fixture(scope="session")
def sierpinski():
    return fixtures.sierpinski()


@pytest.fixture(scope="session")
def twisted():
    """TWISTED-VICSEK at theta = 1e-3 as (base, spec, deformed)."""
    return fixtures.twisted_vicsek(1e-3)


@pytest.fixture(scope="session")
def mismatched():
    return fixtures.mismatched_vicsek(1e-4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def square(x0, y0, s):
    from polydendrite.geometry import Polygon
    return Polygon((complex(x0, y0), complex(x0 + s, y0), complex(x0 + s, y0 + s),
                    complex(x0, y0 + s)))


def close(a, b, tol=1e-9):
    return abs(complex(a) - complex(b)) <= tol


# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


__all__ = ["ACCEPTANCE", "DATA", "square", "close", "math"]
