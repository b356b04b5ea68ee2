import contextlib
import time
from dataclasses import dataclass

import numpy as np
import pytest

from incompat import chsh, jm
from incompat.errors import IncompatError
from incompat.sampling import random_effect

ACCEPTANCE_LINES = []

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def noisy_pair(eta):
    return (I2 + eta * SX) / 2, (I2 - eta * SZ) / 2


class _Record:
    detail = ""


@pytest.fixture
def criterion():
    """``with criterion(n, title) as rec:`` logs one PASS/FAIL line per criterion."""

    @contextlib.contextmanager
    def run(number, title):
        rec = _Record()
        start = time.perf_counter()
        try:
            yield rec
        except BaseException as exc:
            line = f"criterion {number:2d} FAIL  {title}: {rec.detail} [{type(exc).__name__}: {exc}]"
            ACCEPTANCE_LINES.append(line)
            print(line)
            raise
        line = f"criterion {number:2d} PASS  {title}: {rec.detail} ({time.perf_counter() - start:.2f} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return run


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@dataclass
class PairCase:
    q: np.ndarray
    p: np.ndarray
    report: jm.JmReport | None
    scan: chsh.ScanResult
    error: Exception | None = None


@pytest.fixture(scope="session")
def random_pairs():
    """200 seeded random effect pairs with d cycling through 2, 3, 4."""
    rng = np.random.default_rng(20240607)
    cases = []
    start = time.perf_counter()
    for k in range(200):
        d = (2, 3, 4)[k % 3]
        q, p = random_effect(d, rng), random_effect(d, rng)
        scan = chsh.lambda_star_scan(q, p)
        try:
            cases.append(PairCase(q, p, jm.analyze_pair(q, p), scan))
        except IncompatError as exc:
            # kept so that the criteria can report the failure instead of erroring out
            cases.append(PairCase(q, p, None, scan, exc))
    return cases, time.perf_counter() - start
