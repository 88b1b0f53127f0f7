import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from softgrip.calibration import load_grid  # noqa: E402


@pytest.fixture(scope="session")
def grid():
    return load_grid()


ACCEPTANCE_RESULTS = []


def record_criterion(number, title, ok, detail=""):
    ACCEPTANCE_RESULTS.append((number, title, bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
