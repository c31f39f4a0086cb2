import time
from contextlib import contextmanager

import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {}


@pytest.fixture
def criterion(request):
    """Context manager recording PASS / FAIL / SKIPPED-DATA for an acceptance criterion."""
    results = request.config.stash[_RESULTS]

    @contextmanager
    def run(number, title, limit=None):
        start = time.perf_counter()
        try:
            yield
        except pytest.skip.Exception as err:
            results[number] = ("SKIPPED-DATA", title, str(err.msg))
            raise
        except BaseException as err:
            results[number] = ("FAIL", title, f"{type(err).__name__}: {str(err).splitlines()[0] if str(err) else ''}")
            raise
        elapsed = time.perf_counter() - start
        if limit is not None and elapsed > limit:
            results[number] = ("FAIL", title, f"runtime {elapsed:.1f}s exceeds {limit}s")
            pytest.fail(f"criterion {number} took {elapsed:.1f}s (limit {limit}s)")
        results[number] = ("PASS", title, f"{elapsed:.1f}s")

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results, key=str):
        status, title, note = results[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}  ({note})")
