import os

import pytest

# keep CLI tests from writing into a user-configured directory
os.environ.pop("DDEXCHANGE_OUTPUT_DIR", None)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    def report(line):
        ACCEPTANCE_LINES.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
