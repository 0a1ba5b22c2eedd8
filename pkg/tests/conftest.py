"""
Shared pytest configuration and fixtures.
"""

import pytest

from app.config import settings


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow reproduction tests"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def inline_batches(monkeypatch):
    """Run GA batches in-process unless a test asks for a pool explicitly."""
    monkeypatch.setattr(settings, "workers", 1)
