import numpy as np
import pytest

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Store one pass/fail line for an acceptance criterion."""
    def _record(k: int, name: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE[k] = (bool(passed), f"{name}: {detail}")
        return bool(passed)
    return _record


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240601))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, line = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {k:2d}  {line}")
