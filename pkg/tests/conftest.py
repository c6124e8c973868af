from __future__ import annotations

import numpy as np
import pytest

from sdsc_nis.core import SdscDataset, make_dataset, make_problem
from sdsc_nis.io import load_fixture

DN23_MATRICES = {
    "5": [[0.37, 0.20], [0.13, 0.30]],
    "40": [[0.38, 0.17], [0.12, 0.33]],
    "70": [[0.39, 0.17], [0.11, 0.33]],
    "95": [[0.39, 0.14], [0.11, 0.36]],
}


def matching(points: float, n: int = 2) -> np.ndarray:
    return np.eye(n) * points


@pytest.fixture
def dn23() -> SdscDataset:
    return load_fixture("dn23_12")


@pytest.fixture
def dn23_inline() -> SdscDataset:
    """Same data as the bundled fixture, built by hand."""
    problems = [make_problem(k, m, matching(float(k)), counts_per_state=[1300, 1300])
                for k, m in DN23_MATRICES.items()]
    return make_dataset(problems)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
