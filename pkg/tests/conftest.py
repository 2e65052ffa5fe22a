import pytest

from pgic_noma import SolverConfig, alternate_solve, scheme2_solve, scheme3_allocate

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the acceptance summary and return the verdict."""

    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def default_config():
    return SolverConfig()


@pytest.fixture(scope="session")
def default_solves(default_config):
    return {
        1: alternate_solve(default_config),
        2: scheme2_solve(default_config),
        3: scheme3_allocate(default_config),
    }
