import pytest

from extsource.curve import ModelParams

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params():
    return ModelParams(2.0, 0.5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
