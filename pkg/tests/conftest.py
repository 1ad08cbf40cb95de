import random

import pytest

from ltcoleman.arith.context import PrecisionContext

ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def ctx3():
    return PrecisionContext(3, 5, 12, 1)


@pytest.fixture
def criterion(request):
    """Recorder for an acceptance criterion: ``criterion(number, title, checks)`` with ``checks`` a list of
    ``(label, ok)`` pairs.  The outcome is printed in the terminal summary and asserted."""
    results = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number, title, checks):
        failed = [label for label, ok in checks if not ok]
        results[number] = (title, not failed, f"{len(checks) - len(failed)}/{len(checks)} checks"
                           + (f"; failed: {', '.join(failed[:5])}" if failed else ""))
        assert not failed, failed

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and rep.when == "call" and rep.failed:
        results = item.config.stash.setdefault(ACCEPTANCE_KEY, {})
        number, title = marker.args
        if number not in results:
            results[number] = (title, False, f"error: {call.excinfo.typename}")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(results):
        title, ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title} ({detail})")
