from functools import lru_cache

import pytest

from nilword.catalog import catalog_group


@lru_cache(maxsize=None)
def group(spec: str):
    return catalog_group(spec)


@pytest.fixture
def H3():
    return group("heisenberg:3:1")


@pytest.fixture
def H9():
    return group("heisenberg:3:2")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
