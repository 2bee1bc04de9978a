import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from distsense.optimizer import sweep_ratio  # noqa: E402

FIG3_WEIGHTS = ((0.5, -0.5), (0.7, -0.3), (0.9, -0.1))
FIG3_N_TOTAL = 10.0
FIG3_GRID = np.linspace(0.0, 1.0, 11)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def fig3_sweeps():
    """The three opposite-sign squeezing-share sweeps, computed once per session.

    Returns:
        tuple[dict, float]: rows per weight pair and the wall time of all sweeps.
    """
    start = time.perf_counter()
    rows = {w: sweep_ratio(w, FIG3_N_TOTAL, FIG3_GRID) for w in FIG3_WEIGHTS}
    return rows, time.perf_counter() - start


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
