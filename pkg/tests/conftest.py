import pytest

from splitkd.scenario_io import load_scenario


@pytest.fixture(scope="session")
def default_scenario():
    return load_scenario()


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
