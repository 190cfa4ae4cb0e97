import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spec, uniform_spec
from spinbath.correlations import (
    correlation_set,
    moment,
    moment_by_enumeration,
    moments,
    spectral_density,
)
from spinbath.model import thermal_weights, validate_spec

coupling = st.floats(-1, 1, allow_nan=False)
# The zero-temperature oracle ranks summed energies, which cannot resolve
# splittings far below one ulp of the total; keep Omega zero or resolvable.
frequency = st.one_of(st.just(0.0), st.floats(1e-6, 1), st.floats(-1, -1e-6))


@st.composite
def small_specs(draw, n_max=8):
    n = draw(st.integers(1, n_max))
    return validate_spec({
        "n_spins": n,
        "couplings": draw(st.lists(coupling, min_size=n, max_size=n)),
        "frequencies": draw(st.lists(frequency, min_size=n, max_size=n)),
        "beta": draw(st.sampled_from([0.0, 0.1, 1.0, 10.0, math.inf])),
        "alpha": 1.0,
    })


@settings(max_examples=60, deadline=None)
@given(small_specs())
def test_moments_match_enumeration(spec):
    scale = float(np.sum(spec.g ** 2))
    for k in range(2, 9):
        fast, slow = moment(spec, k), moment_by_enumeration(spec, k)
        assert abs(fast - slow) <= 1e-12 * max(abs(slow), scale ** (k / 2), 1e-300)


@settings(max_examples=60, deadline=None)
@given(small_specs())
def test_even_moments_nonnegative_and_q1_zero(spec):
    q = moments(spec, 8)
    assert q[0] == 1.0 and q[1] == 0.0
    assert q[2] >= 0 and q[4] >= 0 and q[6] >= 0 and q[8] >= 0
    assert q[4] >= q[2] ** 2 * (1 - 1e-12)  # Jensen


def test_infinite_temperature_q2_is_sum_of_squares():
    spec = validate_spec({"n_spins": 3, "couplings": [0.2, -0.7, 1.0], "frequencies": [0.3, 0.1, -0.9],
                          "beta": 0.0, "alpha": 1.0})
    assert moment(spec, 2) == pytest.approx(0.04 + 0.49 + 1.0, rel=1e-15)
    assert moment(spec, 3) == pytest.approx(0.0, abs=1e-15)


def test_zero_temperature_has_no_fluctuations():
    spec = validate_spec({"n_spins": 3, "couplings": [0.2, -0.7, 1.0], "frequencies": [0.3, 0.1, -0.9],
                          "beta": "inf", "alpha": 1.0})
    assert moments(spec, 6)[2:].tolist() == [0.0] * 5


def test_single_spin_closed_forms():
    spec = validate_spec({"n_spins": 1, "couplings": [0.8], "frequencies": [0.6], "beta": 1.3, "alpha": 1.0})
    b = thermal_weights(spec).b[0]
    g = 0.8
    assert moment(spec, 2) == pytest.approx(g ** 2 * (1 - b ** 2), rel=1e-14)
    assert moment(spec, 3) == pytest.approx(-2 * g ** 3 * b * (1 - b ** 2), rel=1e-14)
    assert moment(spec, 4) == pytest.approx(g ** 4 * (1 - b ** 2) * (1 + 3 * b ** 2), rel=1e-14)


def test_order_out_of_range():
    spec = uniform_spec(2)
    for k in (0, 9, 2.5):
        with pytest.raises(ValueError):
            moment(spec, k)


def test_correlation_set_fields():
    spec = uniform_spec(5, beta=0.7)
    corr = correlation_set(spec)
    assert corr.q2 == moment(spec, 2) and corr.q3 == moment(spec, 3) and corr.q4 == moment(spec, 4)
    assert corr.theta == pytest.approx(thermal_weights(spec).theta)


def test_spectral_density_merges_lines():
    spec = validate_spec({"n_spins": 4, "couplings": [0.5, 0.5, 0.0, -1.0], "frequencies": [0.2, 0.2, 0.3, -0.4],
                          "beta": 1.0, "alpha": 1.0})
    sd = spectral_density(spec)
    assert dict(sd.lines) == pytest.approx({0.2: 0.5, -0.4: 1.0})
    assert sd.total_weight == pytest.approx(float(np.sum(spec.g ** 2)))


def test_enumeration_refuses_large_baths(rng):
    spec = random_spec(rng, 25, n_min=21)
    with pytest.raises(ValueError):
        moment_by_enumeration(spec, 2)
