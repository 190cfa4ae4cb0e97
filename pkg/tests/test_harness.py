import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DIAGONAL_V0, uniform_spec
from spinbath.config import ConfigError, parse_config
from spinbath.exact import BlochTrajectory, coherence_factor, exact_trajectory
from spinbath.harness import (
    avg_trace_distance,
    beta_sweep,
    ensemble_average,
    ensemble_distances,
    read_trajectory_csv,
    run_comparison,
    run_method,
    trace_distance,
    write_trajectory_csv,
)
from spinbath.model import BlochVector, EnsembleSpec, make_time_grid

# half of a subnormal difference is not representable, so "zero iff equal" needs normal floats
unit = st.floats(-0.57, 0.57, allow_nan=False, allow_subnormal=False)
bloch = st.tuples(unit, unit, unit)


def test_trace_distance_examples():
    assert trace_distance(BlochVector(1, 0, 0), BlochVector(-1, 0, 0)) == 1.0
    assert trace_distance((0.2, 0.1, 0.0), (0.2, 0.1, 0.0)) == 0.0


@given(bloch, bloch, bloch)
def test_trace_distance_is_a_metric(a, b, c):
    assert trace_distance(a, b) == trace_distance(b, a)
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-15
    assert (trace_distance(a, b) == 0) == (a == b)


def _traj(points, grid):
    return BlochTrajectory(grid, np.asarray(points, float), "exact")


def test_avg_trace_distance_examples():
    grid = make_time_grid(0.0, 2.0, 21)
    a = _traj(np.zeros((21, 3)), grid)
    shifted = np.zeros((21, 3))
    shifted[:, 0] = 0.6
    assert avg_trace_distance(a, a, 2.0) == 0.0
    assert avg_trace_distance(a, _traj(shifted, grid), 1.0) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        avg_trace_distance(a, _traj(np.zeros((11, 3)), make_time_grid(0.0, 2.0, 11)))
    with pytest.raises(ValueError):
        avg_trace_distance(a, a, 3.0)


def test_run_method_rejects_unknown_and_bare_cg():
    grid = make_time_grid(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        run_method("nz5", uniform_spec(3), DIAGONAL_V0, grid)
    with pytest.raises(ValueError):
        run_method("cg", uniform_spec(3), DIAGONAL_V0, grid)
    assert run_method("cg", uniform_spec(3), DIAGONAL_V0, grid, optimise_cg=True).method_tag == "cg"


def _ensemble(count, seed=3, n=8):
    return EnsembleSpec(count, seed, uniform_spec(n))


def test_single_member_ensemble_is_the_member():
    grid = make_time_grid(0.0, 3.0, 31)
    ens = _ensemble(1)
    avg = ensemble_average(ens, "tcl4", DIAGONAL_V0, grid)
    single = run_method("tcl4", ens.members()[0], DIAGONAL_V0, grid)
    assert np.array_equal(avg.points, single.points)
    assert avg.provenance["member_count"] == 1 and avg.provenance["seed"] == 3


def test_ensemble_is_deterministic_and_worker_independent():
    grid = make_time_grid(0.0, 3.0, 31)
    a = ensemble_average(_ensemble(12), "exact", DIAGONAL_V0, grid, workers=1)
    b = ensemble_average(_ensemble(12), "exact", DIAGONAL_V0, grid, workers=4)
    assert np.array_equal(a.points, b.points)


def test_ensemble_cg_needs_tau():
    with pytest.raises(ValueError):
        ensemble_average(_ensemble(2), "cg", DIAGONAL_V0, make_time_grid(0.0, 1.0, 5))


def test_ensemble_suppresses_recurrences():
    grid = make_time_grid(0.0, math.pi, 321)  # contains pi/2
    uniform = np.abs(coherence_factor(uniform_spec(100), None, grid).h)
    avg = ensemble_average(EnsembleSpec(50, 11, uniform_spec(100)), "exact", DIAGONAL_V0, grid)
    late = grid.samples > 1.0
    assert uniform[late].max() == pytest.approx(1.0)
    assert np.abs(avg.coherence[late]).max() < 0.1


def test_ensemble_distance_conventions():
    grid = make_time_grid(0.0, 2.0, 41)
    _, dom, mod = ensemble_distances(_ensemble(6), "tcl2", DIAGONAL_V0, grid)
    assert np.all(dom <= mod + 1e-15)  # convexity of the norm
    assert dom[0] == 0.0 and mod[0] == 0.0


def test_beta_sweep_table_and_limits():
    spec = uniform_spec(100)
    table = beta_sweep(spec, 0.1, [0.01, 1.0, 10.0], ["exact", "nz4", "tcl4"], DIAGONAL_V0)
    assert len(table.rows) == 9 and table.alpha_t == 0.1
    # hotter bath decoheres more; near beta = 0 the envelope approaches cos(2 alpha t)^N
    assert table.value(0.01, "exact") < table.value(1.0, "exact") < table.value(10.0, "exact")
    hot = run_method("exact", spec.with_beta(0.01), DIAGONAL_V0, make_time_grid(0.0, 0.1, 2))
    assert table.value(0.01, "exact") == pytest.approx(hot.vx[-1], rel=1e-12)
    assert abs(hot.coherence[-1]) == pytest.approx(math.cos(0.2) ** 100, rel=5e-3)
    gap = [abs(table.value(b, "nz4") - table.value(b, "tcl4")) for b in (1.0, 10.0)]
    assert gap[1] < gap[0]
    with pytest.raises(ValueError):
        beta_sweep(spec, 0.1, [0.0], ["exact"], DIAGONAL_V0)


def test_csv_round_trip_is_bit_exact(tmp_path):
    spec = uniform_spec(100)
    grid = make_time_grid(1e-2, 3.2, 200, "log")
    tr = run_method("nz4", spec, DIAGONAL_V0, grid)
    path = write_trajectory_csv(tmp_path / "nz4.csv", "nz4", tr)
    assert path.read_text().splitlines()[0] == "alpha_t,method,vx,vy,vz,flag"
    t, method, points, flags = read_trajectory_csv(path)
    assert method == "nz4" and flags == tr.flags
    assert np.array_equal(t, grid.samples)
    assert np.array_equal(points, tr.points, equal_nan=True)


CONFIG = {"n_spins": 4, "couplings": "uniform:1", "frequencies": "uniform:1", "beta": 1.0, "alpha": 1.0,
          "grid": {"min": 0.0, "max": 2.0, "count": 41, "scale": "lin"}, "initial_bloch": [0.7, 0.7, 0.0]}


def test_run_comparison_outputs(tmp_path):
    cfg = parse_config({**CONFIG, "methods": ["exact", "tcl2", "pm-optimal", "cg"]})
    report = run_comparison(cfg, tmp_path)
    assert set(report.summary) == {"exact", "tcl2", "pm-optimal", "cg"}
    assert report.summary["exact"] == 0.0
    assert all(np.all(d >= 0) for d in report.distances.values())
    header = (tmp_path / "distances.csv").read_text().splitlines()[0]
    assert header == "alpha_t,tcl2,pm-optimal,cg"
    assert report.metadata["cg_tau"] > 0


def test_run_comparison_ensemble_metrics():
    cfg = parse_config({**CONFIG, "methods": ["exact", "tcl2"], "ensemble": {"count": 3, "seed": 5}})
    report = run_comparison(cfg)
    assert set(report.ensemble_metrics["tcl2"]) == {"dist_of_mean", "mean_of_dist"}


def test_empty_method_list_is_config_error():
    with pytest.raises(ConfigError):
        parse_config({**CONFIG, "methods": []})
