import os

import pytest
from hypothesis import settings

# the suite should be reproducible run to run
settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


def pytest_configure(config):
    config.addinivalue_line("markers", "full: full-size (1e6-replica) tail runs")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("COARSENING_LAB_SKIP_FULL"):
        skip = pytest.mark.skip(reason="COARSENING_LAB_SKIP_FULL set")
        for item in items:
            if "full" in item.keywords:
                item.add_marker(skip)
