from __future__ import annotations

import pytest

from asilalloc.instance import load_case_study
from asilalloc.milp import build_model
from asilalloc.solver import solve

ACCEPTANCE_LINES: list[str] = []

def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

@pytest.fixture(scope="session")
def case_study():
    return load_case_study()

@pytest.fixture(scope="session")
def cost_report(case_study):
    return solve(build_model(case_study, priority="cost"))

@pytest.fixture(scope="session")
def latency_report(case_study):
    return solve(build_model(case_study, priority="latency"))
