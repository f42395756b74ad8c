import pytest

from rigidlab import make_automorphism


@pytest.fixture
def cat():
    return make_automorphism([[2, 1], [1, 1]])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for res in sorted(RESULTS, key=lambda r: r.number):
            terminalreporter.write_line(res.line())
