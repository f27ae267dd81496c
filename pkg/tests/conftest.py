import pytest

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE_REPORT = []


@pytest.fixture
def acceptance_report():
    return ACCEPTANCE_REPORT


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE_REPORT):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {criterion}: {status}  {detail}")
