import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_criteria = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is not None:
        _criteria[crit] = (report.outcome, dict(report.user_properties).get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        outcome, detail = _criteria[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {detail}")


@pytest.fixture
def criterion(request):
    """Tag an acceptance test; call ``criterion(num, detail)`` before asserting."""

    def tag(num, detail=""):
        request.node.user_properties.append(("criterion", num))
        request.node.user_properties.append(("detail", detail))
        print(f"criterion {num}: {detail}")

    return tag
