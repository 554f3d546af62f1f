import pytest

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(code, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        code, title = marker.args
        _criteria.append((code, title, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    merged = {}
    for code, title, outcome in _criteria:
        ok = merged.get(code, (title, True))[1] and outcome == "PASSED"
        merged[code] = (title, ok)
    terminalreporter.section("acceptance criteria")
    for code, (title, ok) in sorted(merged.items()):
        terminalreporter.write_line(f"{code:<4} {'PASS' if ok else 'FAIL':<5} {title}")
