"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""
import pytest

_RESULTS = {}


def _entry(item):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return None
    number, title = mark.args
    return _RESULTS.setdefault(number, {"title": title, "passed": True, "details": [], "ran": 0})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    entry = _entry(item)
    if entry is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        entry["ran"] += 1
        entry["passed"] &= report.passed
        entry["details"].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        e = _RESULTS[number]
        status = "PASS" if e["passed"] and e["ran"] else "FAIL"
        tr.write_line(f"{status}  criterion {number:>2}: {e['title']}")
        for d in e["details"]:
            tr.write_line(f"          {d}")
    passed = sum(e["passed"] and e["ran"] > 0 for e in _RESULTS.values())
    tr.write_line(f"{passed}/{len(_RESULTS)} criteria passed")


@pytest.fixture
def detail(request):
    """Attach a measurement line to the criterion summary."""

    def add(text):
        request.node.user_properties.append(("detail", text))

    return add
