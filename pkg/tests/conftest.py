import pytest

from tritail.theory import TheoryContext

_CTX = {}


@pytest.fixture(scope="session")
def theory():
    """Cached ``TheoryContext`` per tail index."""
    def get(alpha, x_min=1.0):
        key = (alpha, x_min)
        if key not in _CTX:
            _CTX[key] = TheoryContext.create(alpha, x_min)
        return _CTX[key]
    return get


def pytest_terminal_summary(terminalreporter):
    """Echo the one-line verdict of every acceptance item, passing ones included."""
    lines = []
    for rep in terminalreporter.stats.get("passed", []) + terminalreporter.stats.get("failed", []):
        if rep.when == "call" and "test_acceptance" in rep.nodeid:
            lines += [ln for ln in rep.capstdout.splitlines() if ln.startswith(("[PASS]", "[FAIL]"))]
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in sorted(lines, key=lambda s: int(s.split(".")[0].split()[-1])):
            terminalreporter.write_line(ln)
