import sys

import numpy as np
import pytest

from polyproj.hull import build_hull


@pytest.fixture(scope="session")
def octahedron():
    return build_hull(np.eye(3))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
