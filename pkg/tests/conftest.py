import pytest

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    row = _RESULTS.setdefault(number, {"title": title, "passed": True, "seconds": 0.0,
                                       "ran": False})
    if report.when == "call":
        row["ran"] = True
        row["seconds"] += report.duration
    if report.failed:
        row["passed"] = False
        row["ran"] = True


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        row = _RESULTS[number]
        verdict = "PASS" if row["passed"] and row["ran"] else "FAIL"
        tr.write_line(f"[{verdict}] {number:>2}. {row['title']} ({row['seconds']:.2f} s)")
