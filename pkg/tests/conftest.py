import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from coxlim import catalog  # noqa: E402

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def systems():
    return {name: catalog.system(name) for name in catalog.lorentzian_names()}


@pytest.fixture(scope="session")
def r4(systems):
    return systems["rank4-all3"]


@pytest.fixture(scope="session")
def t334(systems):
    return systems["tri334"]


@pytest.fixture(scope="session")
def cusp3(systems):
    return systems["cusp3"]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
