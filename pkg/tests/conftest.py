import itertools
import math

import numpy as np
import pytest


def brute_sphere(d, n):
    """All integer points with squared norm n, found by scanning the box |k_i| <= isqrt(n)."""
    b = math.isqrt(n)
    rng = range(-b, b + 1)
    return sorted(k for k in itertools.product(rng, repeat=d) if sum(v * v for v in k) == n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
