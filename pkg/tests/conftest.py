"""Collects one PASS/FAIL line per acceptance criterion.

Tests tagged ``@pytest.mark.criterion(n, title)`` contribute to criterion n;
a criterion passes when all of its tests pass. Details recorded through the
``record`` fixture are printed next to the verdict.
"""
import pytest

_RESULTS = {}
_DETAILS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    ok, _ = _RESULTS.get(number, (True, title))
    _RESULTS[number] = (ok and not rep.failed, title)


@pytest.fixture()
def record(request):
    mark = request.node.get_closest_marker("criterion")
    number = mark.args[0] if mark else None

    def _record(text):
        _DETAILS.setdefault(number, []).append(text)
        print(text)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        ok, title = _RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}")
        for text in _DETAILS.get(number, []):
            terminalreporter.write_line(f"     {text}")
