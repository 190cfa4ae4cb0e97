"""Qubit dephasing in an Ising spin bath: exact dynamics and approximate master equations."""

from ._accel import backend_name
from .config import ConfigError, RunConfig, load_config, parse_config
from .correlations import CorrelationSet, correlation_set, moment, moment_by_enumeration, moments, spectral_density
from .exact import (
    BlochTrajectory,
    CoherencePair,
    coherence_by_kraus,
    coherence_factor,
    exact_trajectory,
    invertibility_times,
    recurrence_period,
    short_time_trajectory,
)
from .harness import (
    ComparisonReport,
    avg_trace_distance,
    beta_sweep,
    ensemble_average,
    run_comparison,
    run_method,
    trace_distance,
)
from .markovian import born_markov_diagnose, cg_generator, cg_trajectory, optimize_tau
from .model import (
    BathSpec,
    BlochVector,
    EnsembleSpec,
    SpecValidationError,
    TimeGrid,
    make_time_grid,
    sample_random_bath,
    thermal_weights,
    validate_spec,
)
from .postmarkov import KernelSpec, pm_min_distance, pm_response, pm_trajectory
from .projection import NumericalFailure, nz_trajectory, tcl_trajectory

__version__ = "0.1.0"
