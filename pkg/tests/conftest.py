from pathlib import Path

import pytest

from tamperscore.context import load_profile
from tamperscore.defaults import default_kb, default_rubric, shipped_profiles

FIXTURES = Path(__file__).parent / "fixtures"
REPO_ROOT = Path(__file__).parent.parent

# criterion number -> (description, all tests for it passed so far)
_acceptance_results: dict[int, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, description = marker.args
    previous_ok = _acceptance_results.get(number, (description, True))[1]
    _acceptance_results[number] = (description, previous_ok and report.passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance_results):
        description, ok = _acceptance_results[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} - {description}")


@pytest.fixture(scope="session")
def rubric():
    return default_rubric()


@pytest.fixture(scope="session")
def kb(rubric):
    return default_kb(rubric)


@pytest.fixture(scope="session")
def home_profile():
    return shipped_profiles()["home-admin"]


@pytest.fixture(scope="session")
def corporate_profile():
    return shipped_profiles()["corporate-standard-user"]


@pytest.fixture(scope="session")
def timestomp_profile():
    return load_profile((FIXTURES / "timestomp-profile.json").read_bytes())
