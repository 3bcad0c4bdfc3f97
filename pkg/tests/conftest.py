import pytest

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        status, detail = ACCEPTANCE_LINES[key]
        terminalreporter.write_line(f"[{status}] criterion {key}: {detail}")


@pytest.fixture(scope="session")
def karate():
    from signrel.datasets import load_karate

    return load_karate()
