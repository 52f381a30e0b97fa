import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from weighted_gt.config import LAMBDA_A, LAMBDA_B  # noqa: E402
from weighted_gt.weights_graph import make_weights  # noqa: E402

LAMBDA_A_DEGREES = [2, 5, 6, 5, 4, 6, 12, 13, 7, 8, 5, 3, 9, 4, 4, 3]


@pytest.fixture(scope="session")
def lam_A():
    return make_weights(LAMBDA_A)


@pytest.fixture(scope="session")
def lam_B():
    return make_weights(LAMBDA_B)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance_log.LINES):
        terminalreporter.write_line(acceptance_log.LINES[k])
