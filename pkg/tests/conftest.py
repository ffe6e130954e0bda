import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))

_LINES = {}


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion and assert it."""
    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        _LINES[number] = line
        print(line)
        assert ok, line
    return record


@pytest.fixture(autouse=True)
def _cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("PARADIM_CACHE_DIR", str(tmp_path / "cache"))


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance")
    for k in sorted(_LINES):
        terminalreporter.write_line(_LINES[k])
