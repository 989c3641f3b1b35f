import numpy as np
import pytest


def ball_points(rng, count, n=2, radius=0.6):
    """Random (x, y) with |x| < radius and gaussian y."""
    pts = []
    for _ in range(count):
        d = rng.normal(size=n)
        x = d / np.linalg.norm(d) * radius * rng.uniform() ** (1.0 / n)
        pts.append((x, rng.normal(size=n)))
    return pts


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


SUITE_LIMIT = 120.0
_start = {}


def pytest_sessionstart(session):
    import time

    _start["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import time

    if "t" not in _start:
        return
    elapsed = time.perf_counter() - _start["t"]
    ok = elapsed <= SUITE_LIMIT
    terminalreporter.write_line(f"ACCEPTANCE 10: {'PASS' if ok else 'FAIL'} | full suite runtime {elapsed:.1f} s (limit {SUITE_LIMIT:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    import time

    if "t" in _start and time.perf_counter() - _start["t"] > SUITE_LIMIT and session.exitstatus == 0:
        session.exitstatus = 1
