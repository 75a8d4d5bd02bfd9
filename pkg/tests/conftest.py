import contextlib
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"

_acceptance_lines: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion."""

    @contextlib.contextmanager
    def run(label: str):
        try:
            yield
        except BaseException:
            line = f"FAIL  {label}"
            _acceptance_lines.append(line)
            print(line)
            raise
        line = f"PASS  {label}"
        _acceptance_lines.append(line)
        print(line)

    return run


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
