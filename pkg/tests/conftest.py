"""Shared fixtures and the per-criterion pass/fail summary."""

import re

import numpy as np
import pytest

from sparsewarn.synth import synth_dataset

_CRITERION = re.compile(r"test_criterion_(\d+)")
_outcomes = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = _CRITERION.match(item.name)
    if m is None:
        return
    n = int(m.group(1))
    if rep.when == "call" or rep.failed or rep.skipped:
        _outcomes.setdefault(n, []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_outcomes):
        status = "PASS" if all(_outcomes[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def blobs():
    """Small two-class mixture, 40 samples per class in 16 dimensions."""
    return synth_dataset(40, 16, 3.0, seed=7)
