import time
from collections import defaultdict
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

_CRITERIA = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and short title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        passed = rep.outcome == "passed" and not hasattr(rep, "wasxfail")
        _CRITERIA[mark.args[0]].append((item.name, passed, mark.args[1], rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        entries = _CRITERIA[n]
        ok = all(p for _, p, _, _ in entries)
        secs = sum(d for *_, d in entries)
        failed = [name for name, p, _, _ in entries if not p]
        extra = f" (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {entries[0][2]}  [{secs:.1f} s]{extra}")


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def stopwatch():
    start = time.perf_counter()
    return lambda: time.perf_counter() - start
