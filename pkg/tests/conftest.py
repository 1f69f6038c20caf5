import numpy as np
import pytest

from ralm.geometry import Anchor, CabinSpec, Point2D


@pytest.fixture
def cabin():
    return CabinSpec()


@pytest.fixture
def four_anchors():
    return [Anchor(i, Point2D(x, y)) for i, (x, y) in enumerate([(3, 0.2), (27, 0.2), (3, 3.3), (27, 3.3)])]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and not report.failed:
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    passed = report.passed if report.when == "call" else False
    prev = _CRITERIA.get(number)
    if prev is None or prev[1]:
        _CRITERIA[number] = (title, passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
