import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from veriell.blocks import PolyNonlinearity
from veriell.constants import ConstantProvider
from veriell.verify import verify_problem


def run_long() -> bool:
    return os.environ.get("RUN_LONG", "") not in ("", "0")


@pytest.fixture(scope="session")
def emden():
    return PolyNonlinearity.emden()


@pytest.fixture(scope="session")
def constants():
    return ConstantProvider()


@pytest.fixture(scope="session")
def emden10(emden, constants):
    """Full Emden N=10 pipeline: all three methods, shared across the suite."""
    import time
    t0 = time.perf_counter()
    result = verify_problem(emden, 10, ["fixed-point", "kantorovich", "in-classic"],
                            constants=constants)
    result.wall_time = time.perf_counter() - t0
    return result


@pytest.fixture(scope="session")
def emden10_certs(emden10):
    return {c.method: c for c in emden10.certificates}
