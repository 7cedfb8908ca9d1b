import sys
from pathlib import Path

import pytest
from mpmath import mp

_PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(_PROJECT_ROOT / "src") not in sys.path:
    sys.path.insert(0, str(_PROJECT_ROOT / "src"))


@pytest.fixture(autouse=True)
def _precision():
    """Every test runs at 128 bits, whatever the environment says."""
    with mp.workprec(128):
        yield


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the full acceptance suite")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full kernel fits and quadrature slopes")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
