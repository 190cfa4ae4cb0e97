import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinbath.model import (
    BlochVector,
    EnsembleSpec,
    SpecValidationError,
    TimeGrid,
    make_time_grid,
    sample_random_bath,
    thermal_weights,
    validate_spec,
)

BASE = {"n_spins": 2, "couplings": [0.5, -0.25], "frequencies": [1.0, 0.0], "beta": 1.0, "alpha": 1.0}


def test_validate_accepts_aliases_and_inf():
    spec = validate_spec({**BASE, "beta": "inf"})
    assert math.isinf(spec.beta) and spec.alpha == 1.0
    assert spec.g.tolist() == [0.5, -0.25]


@pytest.mark.parametrize("patch, field", [
    ({"couplings": [1.5, 0.0]}, "couplings"),
    ({"frequencies": [0.0, -2.0]}, "frequencies"),
    ({"couplings": [0.1]}, "couplings"),
    ({"beta": -1.0}, "inv_temperature"),
    ({"alpha": 0.0}, "coupling_strength"),
    ({"n_spins": 0}, "n_spins"),
])
def test_validate_rejects_with_field_name(patch, field):
    with pytest.raises(SpecValidationError) as exc:
        validate_spec({**BASE, **patch})
    assert exc.value.field == field


def test_out_of_range_coupling_message():
    with pytest.raises(SpecValidationError, match="coupling out of range"):
        validate_spec({**BASE, "couplings": [1.5, 0.0]})


def test_thermal_weights_zero_temperature_signs():
    spec = validate_spec({**BASE, "beta": "inf"})
    tw = thermal_weights(spec)
    assert tw.b.tolist() == [-1.0, 0.0]
    assert tw.theta == pytest.approx(-0.5)


@given(st.floats(0, 50), st.floats(-1, 1))
def test_thermal_weight_is_tanh(beta, omega):
    spec = validate_spec({"n_spins": 1, "couplings": [1.0], "frequencies": [omega], "beta": beta, "alpha": 1.0})
    assert thermal_weights(spec).b[0] == pytest.approx(math.tanh(-beta * omega / 2), abs=1e-15)


def test_bloch_vector_rejects_outside_ball():
    with pytest.raises(SpecValidationError):
        BlochVector(1.0, 0.1, 0.0)
    assert BlochVector(1 / math.sqrt(2), 1 / math.sqrt(2), 0.0).transverse_norm == pytest.approx(1.0)


def test_time_grid_endpoints_and_monotonic():
    g = make_time_grid(1e-2, 10.0, 50, "log")
    assert g.t_min == 1e-2 and g.t_max == 10.0 and g.count == 50
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        make_time_grid(0.0, 1.0, 10, "log")
    assert not g.samples.flags.writeable


def test_ensemble_members_reproducible_and_in_range():
    base = validate_spec({**BASE, "n_spins": 5, "couplings": [0] * 5, "frequencies": [0] * 5})
    ens = EnsembleSpec(3, 42, base)
    a, b = ens.members(), EnsembleSpec(3, 42, base).members()
    assert a == b
    assert a[0] != a[1]
    assert all(np.all(np.abs(m.g) <= 1) and np.all(np.abs(m.omega) <= 1) for m in a)
    assert sample_random_bath(EnsembleSpec(10, 42, base), 1) == a[1]
    assert EnsembleSpec(3, 43, base).members()[0] != a[0]


def test_digest_stable_and_sensitive():
    a = validate_spec(BASE)
    assert a.digest() == validate_spec(dict(BASE)).digest()
    assert a.digest() != a.with_beta(2.0).digest()


@settings(max_examples=50)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=6))
def test_round_trip_through_dict(gs):
    n = len(gs)
    spec = validate_spec({"n_spins": n, "couplings": gs, "frequencies": gs, "beta": 2.0, "alpha": 0.5})
    assert validate_spec(spec.to_dict()) == spec
