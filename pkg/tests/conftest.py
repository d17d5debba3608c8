import pytest

from constructive_lp import clp_engine

_criterion_lines = pytest.StashKey[list]()


@pytest.fixture(autouse=True)
def _fresh_engine_cache():
    clp_engine.clear_caches()
    yield


@pytest.fixture
def criterion_log(request):
    """Collects ``criterion N: PASS|FAIL`` lines for the end-of-run summary."""
    return request.config.stash.setdefault(_criterion_lines, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_criterion_lines, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
