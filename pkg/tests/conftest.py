import numpy as np
import pytest

from waveheat.generator import assemble_generator
from waveheat.geometry import DomainConfig, build_grid


def make_generator(n1=20, n2=20, coupling="coupled", length=1.0, gamma=0.5):
    return assemble_generator(build_grid(DomainConfig(length, gamma, n1, n2)), coupling=coupling)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    log = request.config.stash.setdefault(ACCEPTANCE_KEY, [])
    entry = {"name": request.node.name, "detail": ""}
    yield entry
    rep = getattr(request.node, "rep_call", None)
    entry["passed"] = bool(rep is not None and rep.passed)
    log.append(entry)


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE_KEY, [])
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for e in sorted(log, key=lambda e: e["name"]):
        status = "PASS" if e["passed"] else "FAIL"
        terminalreporter.write_line(f"{status} {e['name']}: {e['detail']}")
