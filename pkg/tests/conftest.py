import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "gyrolim", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("gyrolim")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if call.when == "setup" and call.excinfo is not None:
        _criteria[number] = (title, "ERROR", call.excinfo.exconly().splitlines()[0])
    elif call.when == "call":
        if call.excinfo is None:
            _criteria[number] = (title, "PASS", "")
        else:
            _criteria[number] = (title, "FAIL", call.excinfo.exconly().splitlines()[0][:240])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status, detail = _criteria[number]
        line = f"criterion {number} {status}: {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
