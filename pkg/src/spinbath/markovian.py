"""Markovian descriptions: the Born-Markov failure and coarse graining.

The coarse-grained generator is

    d rho/dt = -i w [sz, rho] + gamma (sz rho sz - rho),
    w = S(tau) / (2 tau),  gamma = (1 - C(tau)) / (2 tau)

whose exact solution multiplies ``c = v_x + i v_y`` by
``exp(2 (i w - gamma) t)``. Times and ``tau`` are in units of ``alpha t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .correlations import correlation_set
from .exact import BlochTrajectory, coherence_factor, propagate
from .model import BathSpec, BlochVector, TimeGrid, make_time_grid, thermal_weights

__all__ = [
    "MarkovDiagnosis",
    "CoarseGrainGenerator",
    "TauOptimum",
    "born_markov_diagnose",
    "cg_generator",
    "cg_coherence",
    "cg_trajectory",
    "default_horizon",
    "mean_distance_curve",
    "golden_section_min",
    "optimize_tau",
]

MARKOV_UNDEFINED = "Markov limit undefined"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class MarkovDiagnosis:
    """Outcome of attempting the Born-Markov limit.

    ``rate`` is the would-be dephasing rate ``2 alpha^2 int_0^inf Q2 dt``:
    infinite whenever ``Q2 > 0``, ``None`` when there is no decoherence.
    """

    status: str
    reason: str
    q2: float
    dissipator: str
    lamb_shift: float
    rate: float | None

    @property
    def finite(self) -> bool:
        return False


@dataclass(frozen=True)
class CoarseGrainGenerator:
    tau: float
    omega_tilde: float
    gamma_tilde: float


@dataclass(frozen=True, eq=False)
class TauOptimum:
    tau: float
    mean_distance: float
    generator: CoarseGrainGenerator
    tau_grid: np.ndarray
    curve: np.ndarray
    horizon: float
    time_grid: TimeGrid


def born_markov_diagnose(spec: BathSpec) -> MarkovDiagnosis:
    """The bath correlation ``Q2`` does not decay, so the Markov rate diverges."""
    q2 = correlation_set(spec).q2
    if q2 > 0:
        return MarkovDiagnosis(
            status=MARKOV_UNDEFINED,
            reason="constant bath correlation: Q2 is time independent, so its time integral diverges",
            q2=q2,
            dissipator="sz rho sz - rho",
            lamb_shift=0.0,
            rate=math.inf,
        )
    return MarkovDiagnosis(
        status=DEGENERATE,
        reason="zero coupling to decoherence: Q2 = 0",
        q2=q2,
        dissipator="sz rho sz - rho",
        lamb_shift=0.0,
        rate=None,
    )


def _generator_from(h_tau: complex, tau: float) -> CoarseGrainGenerator:
    # C <= 1 exactly; clamp rounding so the generator stays dissipative
    return CoarseGrainGenerator(tau, h_tau.imag / (2.0 * tau), max(1.0 - h_tau.real, 0.0) / (2.0 * tau))


def cg_generator(spec: BathSpec, tau: float) -> CoarseGrainGenerator:
    if not tau > 0:
        raise ValueError("coarse-graining time must be positive")
    tw = thermal_weights(spec)
    h_tau = complex(_kernels.coherence_product(spec.g, tw.b, tw.theta, np.array([float(tau)]))[0])
    return _generator_from(h_tau, float(tau))


def cg_coherence(gen: CoarseGrainGenerator, tau_samples: np.ndarray) -> np.ndarray:
    return np.exp(2.0 * (1j * gen.omega_tilde - gen.gamma_tilde) * np.asarray(tau_samples))


def cg_trajectory(gen: CoarseGrainGenerator, v0: BlochVector, grid: TimeGrid) -> BlochTrajectory:
    return BlochTrajectory(
        grid,
        propagate(cg_coherence(gen, grid.samples), v0),
        "cg",
        provenance={"tau": gen.tau, "omega_tilde": gen.omega_tilde, "gamma_tilde": gen.gamma_tilde},
    )


def default_horizon(spec: BathSpec) -> float:
    """Three Gaussian e-folds of the short-time decay, ``3 / sqrt(2 Q2)``."""
    q2 = correlation_set(spec).q2
    if q2 <= 0:
        raise ValueError("no decay (Q2 = 0): supply an explicit horizon")
    return 3.0 / math.sqrt(2.0 * q2)


def mean_distance_curve(spec: BathSpec, v0: BlochVector, taus, time_grid: TimeGrid) -> np.ndarray:
    """Mean trace distance between exact and coarse-grained solutions for each ``tau``."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    tw = thermal_weights(spec)
    h_exact = coherence_factor(spec, tw, time_grid).h
    h_taus = _kernels.coherence_product(spec.g, tw.b, tw.theta, taus)
    scale = 0.5 * v0.transverse_norm
    out = np.empty(taus.size)
    for i, (tau, h_tau) in enumerate(zip(taus, h_taus)):
        gen = _generator_from(complex(h_tau), float(tau))
        out[i] = scale * np.mean(np.abs(h_exact - cg_coherence(gen, time_grid.samples)))
    return out


def golden_section_min(func, lo: float, hi: float, iterations: int = 20):
    """Golden-section search on ``[lo, hi]``; returns ``(x, f(x))`` of the best point seen."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = func(x1), func(x2)
    best = min((f1, x1), (f2, x2))
    for _ in range(iterations):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = func(x1)
            best = min(best, (f1, x1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = func(x2)
            best = min(best, (f2, x2))
    return best[1], best[0]


def optimize_tau(spec: BathSpec, v0: BlochVector, horizon: float | None = None, tau_grid=None,
                 time_grid: TimeGrid | None = None, iterations: int = 20) -> TauOptimum:
    """Coarse-graining time minimising the mean trace distance to the exact solution.

    The mean runs over ``time_grid`` (default: 512 linear samples on
    ``[0, horizon]``). A global scan of ``tau_grid`` (default: 64
    log-spaced values on ``[horizon/100, 10 horizon]``) is followed by one
    golden-section pass inside the best grid cell.
    """
    horizon = default_horizon(spec) if horizon is None else float(horizon)
    if time_grid is None:
        time_grid = make_time_grid(0.0, horizon, 512, "linear")
    if tau_grid is None:
        tau_grid = np.geomspace(horizon / 100.0, 10.0 * horizon, 64)
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.size == 0:
        raise ValueError("tau grid is empty")
    if np.any(tau_grid <= 0):
        raise ValueError("coarse-graining times must be positive")

    curve = mean_distance_curve(spec, v0, tau_grid, time_grid)
    i = int(np.argmin(curve))
    tau_best, d_best = float(tau_grid[i]), float(curve[i])
    if tau_grid.size > 1:
        lo = float(tau_grid[max(i - 1, 0)])
        hi = float(tau_grid[min(i + 1, tau_grid.size - 1)])
        x, fx = golden_section_min(
            lambda tau: float(mean_distance_curve(spec, v0, [tau], time_grid)[0]), lo, hi, iterations
        )
        if fx < d_best:
            tau_best, d_best = x, fx
    return TauOptimum(
        tau=tau_best,
        mean_distance=d_best,
        generator=cg_generator(spec, tau_best),
        tau_grid=tau_grid,
        curve=curve,
        horizon=horizon,
        time_grid=time_grid,
    )
