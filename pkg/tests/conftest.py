import pytest

from qde import effective_model as em

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def device():
    return em.build_device()


@pytest.fixture(scope="session")
def cascade(device):
    return em.run_cascade(device)


@pytest.fixture
def report():
    """Record one acceptance line; the lines are repeated in the terminal summary."""

    def _report(line):
        print(line)
        ACCEPTANCE_LINES.append(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
