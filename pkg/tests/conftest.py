from __future__ import annotations

import pytest

from ferrospot.envelope import default_canonical
from ferrospot.spectrum import FerrofluidParams


@pytest.fixture(scope="session")
def canonical():
    return default_canonical()


@pytest.fixture(scope="session")
def spot_a_point() -> FerrofluidParams:
    # A+ band: c3 > 0, nu > 0
    return FerrofluidParams.from_physical(1.0, 0.5)


@pytest.fixture(scope="session")
def rich_point() -> FerrofluidParams:
    # A+B-R+R- band: c3 < 0, nu > 0
    return FerrofluidParams.from_physical(1.0, 0.6)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
