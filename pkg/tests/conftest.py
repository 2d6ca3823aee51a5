import functools
import os
import sys
import time

sys.path.insert(0, os.path.dirname(__file__))

from ospyangian.relcheck import SUITES  # noqa: E402
from ospyangian.superspace import make_space  # noqa: E402

SUITE_SECONDS = {}
ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def suite_report(name, N, m, K=3, seed=42):
    """Run a suite once per session; several test files read the same report."""
    t0 = time.perf_counter()
    rep = SUITES[name](make_space(N, m), K, seed)
    SUITE_SECONDS[(name, N, m, K, seed)] = time.perf_counter() - t0
    return rep


def suite_seconds(name, N, m, K=3, seed=42):
    suite_report(name, N, m, K, seed)
    return SUITE_SECONDS[(name, N, m, K, seed)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
