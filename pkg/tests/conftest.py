import pytest

from compandor.design import DesignConfig, ModelKind, build_segment_grid

from published import LEVELS

# criterion label -> (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def grids():
    return {n: build_segment_grid(DesignConfig(n, ModelKind.QUADRATIC)) for n in LEVELS}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, (ok, detail) in sorted(ACCEPTANCE_RESULTS.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
