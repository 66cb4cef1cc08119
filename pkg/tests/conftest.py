import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def plane_enumeration():
    from squashed_s7.classification import enumerate_plane_solutions
    return enumerate_plane_solutions()


@pytest.fixture(scope="session")
def t3_slice():
    from squashed_s7.classification import t3_slice_solve
    return t3_slice_solve()


_ACCEPTANCE = {}


@pytest.fixture
def record_criterion(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {detail}"
        _ACCEPTANCE[n] = line
        with capman.global_and_fixture_disabled():
            print(f"\n{line}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
