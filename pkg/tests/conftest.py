import os
import sys
import time

import pytest

HERE = os.path.dirname(__file__)
ROOT = os.path.dirname(HERE)
SCENARIOS = os.path.join(ROOT, "scenarios")

sys.path.insert(0, HERE)

from satbackstep.cli import run_all  # noqa: E402
from satbackstep.scenario import load_scenario  # noqa: E402

SUITE_BUDGET_S = 60.0
ACCEPTANCE_LINES = []
_START = time.perf_counter()


def scenario_path(name):
    return os.path.join(SCENARIOS, name)


def report(line):
    """Record one acceptance line for the terminal summary."""
    ACCEPTANCE_LINES.append(line)


@pytest.fixture(scope="session")
def reference_runs():
    """Results of every shipped reference scenario, keyed by file name.

    Values are ``(scenario, results, seconds)``.
    """
    out = {}
    for name in ("global.json", "blf_timevarying.json", "blf_constant.json"):
        path = scenario_path(name)
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        sc = load_scenario(path)
        t0 = time.perf_counter()
        results = run_all(sc, text, jobs=1)
        out[name] = (sc, results, time.perf_counter() - t0)
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _START
    if not ACCEPTANCE_LINES:
        return
    verdict = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
    report(f"criterion 7c suite runtime: {verdict} ({elapsed:.1f} s, budget {SUITE_BUDGET_S:.0f} s)")
    if verdict == "FAIL" and exitstatus == 0:
        session.exitstatus = 1
