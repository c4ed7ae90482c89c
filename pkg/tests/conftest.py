import pytest

from sbk.graph import DirectedMultigraph


@pytest.fixture
def bubble():
    # s=0 -> {a=1, b=2} -> t=3
    return DirectedMultigraph.from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)])


@pytest.fixture
def chained_bubbles():
    # s=0 -> {1, 2} -> m=3 -> {4, 5} -> t=6
    return DirectedMultigraph.from_edges(
        7, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6)])


# -- acceptance reporting: one PASS/FAIL line per criterion ---------------------

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA.append((number, title, "PASS" if rep.passed else "FAIL", rep.duration, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, verdict, secs, detail in sorted(_CRITERIA):
        line = f"criterion {number} {verdict}: {title} ({secs:.1f}s)"
        terminalreporter.write_line(line + (f" | {detail}" if detail else ""))
