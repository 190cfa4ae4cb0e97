import math

import numpy as np
import pytest

from spinbath.model import BlochVector, validate_spec

_CRITERIA = []


def random_spec(rng, n_max=12, betas=(0.1, 1.0, 10.0, math.inf), n_min=1, alpha=1.0):
    n = int(rng.integers(n_min, n_max + 1))
    return validate_spec({
        "n_spins": n,
        "couplings": rng.uniform(-1, 1, n),
        "frequencies": rng.uniform(-1, 1, n),
        "beta": betas[int(rng.integers(len(betas)))],
        "alpha": alpha,
    })


def uniform_spec(n, g=1.0, omega=1.0, beta=1.0, alpha=1.0):
    return validate_spec({"n_spins": n, "couplings": [g] * n, "frequencies": [omega] * n,
                          "beta": beta, "alpha": alpha})


DIAGONAL_V0 = BlochVector(1 / math.sqrt(2), 1 / math.sqrt(2), 0.0)


@pytest.fixture
def criterion():
    """Record a pass/fail line for the acceptance summary, then assert."""

    def check(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip()
        _CRITERIA.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
