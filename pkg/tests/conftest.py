import time

import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config.stash[_RESULTS] = {}


@pytest.fixture
def note(request):
    """Attach a short detail string to the criterion summary line."""
    def add(text):
        request.node.user_properties.append(("note", text))
    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and not report.failed):
        return
    entry = item.config.stash[_RESULTS].setdefault(marker.args[0], {"ok": True, "notes": []})
    entry["ok"] &= report.passed
    if report.when == "call":
        notes = [v for k, v in item.user_properties if k == "note"]
        entry["notes"].append(f"{item.name.removeprefix('test_')} {call.duration:.1f}s"
                              + (f" [{'; '.join(notes)}]" if notes else ""))


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[_RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        r = results[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if r['ok'] else 'FAIL'}  "
                                    + " | ".join(r["notes"]))


@pytest.fixture
def stopwatch():
    class Watch:
        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.t0
    return Watch
