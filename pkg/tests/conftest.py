import pytest

from coopnet import text
from coopnet.fixtures import fixture_path


@pytest.fixture(autouse=True)
def bundled_lexicons():
    text.configure()
    yield
    text.configure()


@pytest.fixture
def fixtures_dir():
    return fixture_path("")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
