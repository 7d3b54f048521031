import numpy as np
import pytest

from vortexsheet.continuation import trace_branch
from vortexsheet.linear import bifurcation_point

BRANCH_CASES = {
    "speed": dict(kind="speed", m=2, sigma=1.0, gamma=0.0, sign="+"),
    "tension": dict(kind="tension", m=2, c=1.0, gamma=1.0),
    "vorticity": dict(kind="vorticity", m=2, sigma=1.0, sign="+"),
}


def make_point(name):
    kw = dict(BRANCH_CASES[name])
    return bifurcation_point(kw.pop("kind"), kw.pop("m"), **kw)


@pytest.fixture(scope="session")
def branches():
    """Ten-step branches at ds = 1e-3 for the three families, computed once."""
    return {name: trace_branch(make_point(name), 1e-3, 10) for name in BRANCH_CASES}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per criterion and assert it."""

    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
