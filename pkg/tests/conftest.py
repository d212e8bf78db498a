import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_LINES = []


class Recorder:
    def __call__(self, criterion, ok, text, seconds=None):
        tag = "PASS" if ok else "FAIL"
        line = f"[{tag}] criterion {criterion}: {text}"
        if seconds is not None:
            line += f" ({seconds:.2f} s)"
        _LINES.append(line)
        print(line)
        return ok


@pytest.fixture
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
