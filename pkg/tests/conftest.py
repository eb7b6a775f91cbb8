"""Shared fixtures and the acceptance-summary reporter."""

import numpy as np
import pytest

from ncpiv.families import WeightFamily, build_family

# acceptance tests register one verdict line per criterion here; the
# terminal-summary hook prints them after the run so every criterion
# gets an explicit pass/fail line in the output
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def fam_a():
    return build_family(WeightFamily(kind="a", nu=1.0), nmax=12)


@pytest.fixture(scope="session")
def fam_b():
    return build_family(WeightFamily(kind="b", nu=1.0), nmax=12)


@pytest.fixture(scope="session")
def fam_scalar():
    return build_family(WeightFamily(kind="scalar"), nmax=12)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260823)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for idx in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[idx])
