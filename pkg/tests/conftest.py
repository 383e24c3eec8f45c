import sys

import numpy as np
import pytest

from pindex.linalg import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


def gaussian_dataset(rng, n=60, p=6, beta=None, sigma=1.0):
    X = rng.standard_normal((n, p))
    beta = np.zeros(p) if beta is None else np.asarray(beta, dtype=float)
    f = X @ beta
    y = f + sigma * rng.standard_normal(n)
    return Dataset(y, X, truth=f, sigma=sigma)


def pytest_terminal_summary(terminalreporter):
    mod = next(
        (m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance") and hasattr(m, "VERDICTS")),
        None,
    )
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.VERDICTS):
        ok, detail = mod.VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
