"""Exact reduced dynamics of the dephasing qubit.

Convention: the transverse Bloch component ``c = v_x + i v_y`` evolves as
``c(t) = (C(t) + i S(t)) c(0)`` with

    C(t) + i S(t) = sum_l lambda_l exp(2i alpha E~_l t)
                  = exp(-2i alpha theta t) prod_n [cos(2 alpha g_n t) + i beta_n sin(2 alpha g_n t)]

so that ``v_x(t) = v_x(0) C - v_y(0) S`` and ``v_y(t) = v_x(0) S + v_y(0) C``.
The density-matrix element ``<0|rho|1>`` is multiplied by the complex
conjugate, ``f(t) = C - iS`` (available as :attr:`CoherencePair.f`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .correlations import MAX_ENUMERATION_SPINS, correlation_set, enumerate_configurations
from .model import BathSpec, BlochVector, ThermalWeights, TimeGrid, thermal_weights

__all__ = [
    "METHOD_TAGS",
    "FLAGS",
    "LEFT_SPHERE_TOL",
    "CoherencePair",
    "BlochTrajectory",
    "propagate",
    "coherence_factor",
    "coherence_by_kraus",
    "exact_trajectory",
    "short_time_trajectory",
    "zeno_validity",
    "recurrence_period",
    "invertibility_times",
    "spectral_partition",
    "combine_partition",
]

METHOD_TAGS = ("exact", "short_time", "nz2", "nz3", "nz4", "tcl2", "tcl3", "tcl4", "cg", "pm")
FLAGS = ("ok", "left_bloch_sphere", "tcl_invalid", "cp_violation")
LEFT_SPHERE_TOL = 1e-9
RECURRENCE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CoherencePair:
    """Sampled ``C(alpha t)`` and ``S(alpha t)``."""

    grid: TimeGrid
    c_values: np.ndarray
    s_values: np.ndarray
    method_tag: str = "product"

    @classmethod
    def from_complex(cls, grid: TimeGrid, h: np.ndarray, method_tag: str) -> "CoherencePair":
        h = np.asarray(h, dtype=complex)
        return cls(grid, h.real.copy(), h.imag.copy(), method_tag)

    @property
    def h(self) -> np.ndarray:
        """``C + iS``, the multiplier of ``v_x + i v_y``."""
        return self.c_values + 1j * self.s_values

    @property
    def f(self) -> np.ndarray:
        """``C - iS``, the multiplier of the density-matrix element ``<0|rho|1>``."""
        return self.c_values - 1j * self.s_values

    @property
    def modulus(self) -> np.ndarray:
        return np.hypot(self.c_values, self.s_values)


@dataclass(frozen=True, eq=False)
class BlochTrajectory:
    """Bloch vectors on a grid, tagged by the method that produced them.

    ``flags`` holds one entry of :data:`FLAGS` per sample. ``validity`` is
    an optional per-sample mask for approximations with a stated regime.
    """

    grid: TimeGrid
    points: np.ndarray
    method_tag: str
    flags: tuple[str, ...] = ()
    provenance: dict = field(default_factory=dict)
    validity: np.ndarray | None = None

    def __post_init__(self):
        if self.method_tag not in METHOD_TAGS:
            raise ValueError(f"unknown method tag {self.method_tag!r}")
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (self.grid.count, 3):
            raise ValueError(f"points shape {pts.shape} does not match grid of {self.grid.count}")
        object.__setattr__(self, "points", pts)
        flags = tuple(self.flags) if self.flags else ("ok",) * self.grid.count
        if len(flags) != self.grid.count or not set(flags) <= set(FLAGS):
            raise ValueError("flags must hold one known flag per sample")
        object.__setattr__(self, "flags", flags)

    @property
    def vx(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def vy(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def vz(self) -> np.ndarray:
        return self.points[:, 2]

    @property
    def coherence(self) -> np.ndarray:
        return self.points[:, 0] + 1j * self.points[:, 1]


def propagate(h: np.ndarray, v0: BlochVector) -> np.ndarray:
    """Apply the multiplier ``h`` to ``v_x + i v_y``; ``v_z`` is untouched."""
    h = np.asarray(h, dtype=complex)
    c = h * complex(v0.vx, v0.vy)
    pts = np.empty((h.size, 3))
    pts[:, 0] = c.real
    pts[:, 1] = c.imag
    pts[:, 2] = v0.vz
    return pts


def left_sphere_flags(points: np.ndarray, base: Sequence[str] | None = None) -> tuple[str, ...]:
    with np.errstate(over="ignore", invalid="ignore"):
        norm = np.sqrt(np.sum(points ** 2, axis=1))
    outside = ~(norm <= 1.0 + LEFT_SPHERE_TOL)  # NaN counts as outside
    base = base if base is not None else ("ok",) * len(norm)
    return tuple("left_bloch_sphere" if o else f for o, f in zip(outside, base))


def coherence_factor(spec: BathSpec, weights: ThermalWeights | None, grid: TimeGrid) -> CoherencePair:
    """Product-formula coherence, ``O(N)`` per sample."""
    weights = weights if weights is not None else thermal_weights(spec)
    h = _kernels.coherence_product(spec.g, weights.b, weights.theta, grid.samples)
    return CoherencePair.from_complex(grid, h, "product")


def coherence_by_kraus(spec: BathSpec, weights: ThermalWeights | None, grid: TimeGrid) -> CoherencePair:
    """Coherence summed over all ``2^N`` Kraus branches (test oracle).

    ``weights`` is accepted for signature symmetry but ignored: the
    branch probabilities and the shift are rebuilt from the Gibbs state.
    """
    if spec.n_spins > MAX_ENUMERATION_SPINS:
        raise ValueError(f"Kraus enumeration refused for N = {spec.n_spins} > {MAX_ENUMERATION_SPINS}")
    shifted, lam = enumerate_configurations(spec)
    h = _kernels.kraus_sum(shifted, lam, grid.samples)
    return CoherencePair.from_complex(grid, h, "kraus")


def exact_trajectory(spec: BathSpec, v0: BlochVector, grid: TimeGrid) -> BlochTrajectory:
    pair = coherence_factor(spec, None, grid)
    return BlochTrajectory(
        grid,
        propagate(pair.h, v0),
        "exact",
        provenance={"bath": spec.digest()},
    )


def zeno_validity(q2: float, grid: TimeGrid, threshold: float = 0.01) -> np.ndarray:
    """Samples where ``2 Q_2 (alpha t)^2 <= threshold``."""
    return 2.0 * q2 * grid.samples ** 2 <= threshold


def short_time_trajectory(spec: BathSpec, v0: BlochVector, grid: TimeGrid, threshold: float = 0.01) -> BlochTrajectory:
    """Gaussian (Zeno-regime) decay ``exp(-2 Q_2 (alpha t)^2)`` with no rotation."""
    q2 = correlation_set(spec).q2
    envelope = np.exp(-2.0 * q2 * grid.samples ** 2)
    return BlochTrajectory(
        grid,
        propagate(envelope, v0),
        "short_time",
        provenance={"bath": spec.digest(), "q2": q2, "zeno_threshold": threshold},
        validity=zeno_validity(q2, grid, threshold),
    )


def recurrence_period(spec: BathSpec, grid: TimeGrid | None = None) -> float | None:
    """Full-recurrence period in units of ``alpha t``.

    With all ``|g_n|`` equal to ``g`` every factor of the product returns
    to one at ``alpha t = pi / g``, so that value is returned analytically
    (``|f|`` can already be one at half of it). Otherwise the first grid
    sample after zero with ``|f| >= 1 - 1e-9`` is returned, or ``None``.
    """
    mags = np.abs(spec.g)
    g = float(mags[0])
    if g > 0 and np.all(np.abs(mags - g) <= 1e-12 * g):
        return math.pi / g
    if grid is None:
        return None
    pair = coherence_factor(spec, None, grid)
    hits = np.nonzero((pair.modulus >= 1.0 - RECURRENCE_TOL) & (grid.samples > 0))[0]
    return float(grid.samples[hits[0]]) if hits.size else None


def invertibility_times(pair: CoherencePair, tol: float = 1e-6) -> np.ndarray:
    """Grid times where ``C^2 + S^2 <= tol^2`` (the dynamical map is not invertible)."""
    mod2 = pair.c_values ** 2 + pair.s_values ** 2
    return pair.grid.samples[mod2 <= tol * tol]


def spectral_partition(spec: BathSpec, weights: ThermalWeights | None, grid: TimeGrid,
                       groups: Sequence[Sequence[int]]) -> list[CoherencePair]:
    """Partial products over disjoint groups of spins, without the ``theta`` phase.

    Spin indices are zero-based. The product of the returned factors times
    ``exp(-2i theta alpha t)`` is the full coherence; see :func:`combine_partition`.
    """
    weights = weights if weights is not None else thermal_weights(spec)
    flat = sorted(i for grp in groups for i in grp)
    if flat != list(range(spec.n_spins)) or any(len(grp) == 0 for grp in groups):
        raise ValueError("groups must partition the spin indices 0..N-1 into non-empty sets")
    g, b = spec.g, weights.b
    factors = []
    for grp in groups:
        idx = np.asarray(grp, dtype=int)
        h = _kernels.coherence_product(g[idx], b[idx], 0.0, grid.samples)
        factors.append(CoherencePair.from_complex(grid, h, "partition"))
    return factors


def combine_partition(factors: Sequence[CoherencePair], theta: float) -> CoherencePair:
    grid = factors[0].grid
    h = np.exp(-2j * theta * grid.samples)
    for fac in factors:
        h = h * fac.h
    return CoherencePair.from_complex(grid, h, "product")
