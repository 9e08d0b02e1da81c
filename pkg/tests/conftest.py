import sys

import numpy as np
import pytest
from hypothesis import settings

from crstab.harmonics import build_basis

settings.register_profile("crstab", max_examples=25, deadline=None)
settings.load_profile("crstab")


@pytest.fixture(scope="session")
def basis1():
    return build_basis(1, 4)


@pytest.fixture(scope="session")
def basis2():
    return build_basis(2, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, passed, detail = results[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number} {title}: {detail}")
