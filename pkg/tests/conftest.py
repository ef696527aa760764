import math

import pytest

from cnaplan.kinematics import AgentSpec, CnaSpec
from cnaplan.simulator import Scenario

# agent 2 starts nearest the CNA; variances are the ones of the worked 4-agent example
FOUR_AGENT = [
    ((-663.0, 456.0), 5.806, 2610.0),
    ((-147.0, 219.0), 2.566, 1747.0),
    ((750.0, 91.0), 2.891, 837.0),
    ((172.0, -870.0), 1.798, 557.0),
]


def make_scenario(specs, t_max=2000.0, D=None, noise=None, **kw):
    """specs: iterable of (start, heading, nu0)."""
    agents = [AgentSpec(i + 1, start, heading, 0.5, nu0) for i, (start, heading, nu0) in enumerate(specs)]
    extra = {} if noise is None else {"noise": noise}
    return Scenario(agents, CnaSpec((0.0, 0.0), 1.0), t_max=t_max, D=D, **extra, **kw)


@pytest.fixture
def four_agent():
    return make_scenario(FOUR_AGENT)


@pytest.fixture
def two_agent():
    return make_scenario([((300.0, 0.0), math.pi, 900.0), ((0.0, 400.0), 0.0, 200.0)])


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    doc = getattr(report, "criterion", None)
    _acceptance.append((report.nodeid.split("::")[-1], "PASS" if report.passed else "FAIL", doc))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.function.__doc__:
        rep.criterion = item.function.__doc__.strip().splitlines()[0]


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, doc in _acceptance:
        terminalreporter.write_line(f"{status}  {doc or name}")
