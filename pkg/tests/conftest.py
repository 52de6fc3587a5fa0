import pytest

ACCEPTANCE = []


def record(criterion, passed, detail=""):
    ACCEPTANCE.append((criterion, bool(passed), detail))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running pipeline studies")
    config.addinivalue_line("markers", "acceptance: exit criteria of the build")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}")


@pytest.fixture
def acceptance():
    return record
