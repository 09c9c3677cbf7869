import pytest

from listident import CanonicalCollection, ExplicitCollection


@pytest.fixture
def c1():
    return CanonicalCollection(1)


@pytest.fixture
def c2():
    return CanonicalCollection(2)


@pytest.fixture
def chain3():
    return ExplicitCollection([{1, 2, 3}, {1, 2}, {1}])


@pytest.fixture
def pair():
    return ExplicitCollection([{1, 2}, {1}])


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance_log.RESULTS):
        terminalreporter.write_line(acceptance_log.line(n))
    for note in acceptance_log.NOTES:
        terminalreporter.write_line(f"note: {note}")
