from functools import lru_cache

import pytest

from hls_lab.sphere import Params, build_grid

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def grid_for(n: int, s: float, L: int = 32, m: int | None = None):
    return build_grid(Params(n, s), L, m)


@pytest.fixture(scope="session")
def g31():
    return grid_for(3, 1.0)


@pytest.fixture(scope="session")
def g41():
    return grid_for(4, 1.0)


@pytest.fixture(scope="session")
def p31():
    return Params(3, 1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
