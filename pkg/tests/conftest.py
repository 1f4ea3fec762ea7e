import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request, capsys):
    """Record and print one acceptance verdict: ``criterion(k, passed, detail)``."""
    results = request.config.stash.setdefault(_CRITERIA, {})

    def report(number: int, passed: bool, detail: str) -> bool:
        line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        results[number] = line
        with capsys.disabled():
            print(f"\n{line}")
        return passed

    return report


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_CRITERIA, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
