import pytest

from spinlab.graph import complete_graph, generate_random_regular, petersen_graph


@pytest.fixture(scope="session")
def k4():
    return complete_graph(4)


@pytest.fixture(scope="session")
def petersen():
    return petersen_graph()


@pytest.fixture(scope="session")
def rrg200():
    return generate_random_regular(200, 7, 11)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture()
def verdict():
    """Record one PASS/FAIL line per acceptance criterion and return the flag."""

    def record(criterion, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
