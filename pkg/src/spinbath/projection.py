"""Nakajima-Zwanzig and time-convolutionless master equations to fourth order.

Acting on ``c = v_x + i v_y`` the two elementary superoperators reduce to
scalars: ``rho - sz rho sz -> 2c`` and ``sz rho - rho sz -> -2c``. With
``tau = alpha t`` the NZ equations become

    dc/dtau = -4 Q2 I1[c] - 8i Q3 I2[c] + 16 (Q4 - Q2^2) I3[c]

where ``I_m`` is the m-fold iterated integral from 0 to tau. Introducing
``c_j = I_j[c]`` turns this into a constant-coefficient linear system of
dimension ``order`` that is solved by matrix exponential.

The helpers :func:`nz_kernel_coefficients`, :func:`nz_system_matrix` and
:func:`tcl_exponent` use plain arithmetic only, so they also accept
``mpmath`` numbers for high-precision checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .correlations import CorrelationSet
from .exact import (
    BlochTrajectory,
    coherence_factor,
    invertibility_times,
    left_sphere_flags,
    propagate,
)
from .model import BathSpec, BlochVector, TimeGrid

__all__ = [
    "NumericalFailure",
    "CumulantSet",
    "cumulants",
    "tcl_exponent",
    "tcl_trajectory",
    "nz2_trajectory",
    "nz_kernel_coefficients",
    "nz_system_matrix",
    "nz_coherence",
    "nz_trajectory",
]

SUPPORTED_ORDERS = (2, 3, 4)


class NumericalFailure(RuntimeError):
    """A solver produced non-finite values while the solution was still physical."""

    def __init__(self, method: str, message: str):
        super().__init__(f"{method}: {message}")
        self.method = method


def _check_order(order):
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order {order!r}; expected one of {SUPPORTED_ORDERS}")


@dataclass(frozen=True)
class CumulantSet:
    """Coefficients of ``D rho = rho - sz rho sz`` and ``K rho = sz rho - rho sz``.

    ``order2`` and ``order3`` are shared by both expansions. The fourth
    order differs: NZ uses the partial cumulant (``Q4 - Q2^2``), TCL the
    ordered one (``Q4 - 3 Q2^2``).
    """

    order2: float  # <L^2> = -2 Q2 D
    order3: complex  # <L^3> = 4i Q3 K
    order4_pc: float  # <L^4> - <L^2>^2 = 8 (Q4 - Q2^2) D
    order4_oc: float  # <L^4> - 3 <L^2>^2 = 8 (Q4 - 3 Q2^2) D
    second_squared: float  # <L^2>^2 = 8 Q2^2 D

    @property
    def tcl4_quartic(self) -> float:
        """Coefficient of ``(alpha t)^4`` in the TCL4 log-envelope."""
        return self.order4_oc / 12.0


def cumulants(corr: CorrelationSet) -> CumulantSet:
    q2, q3, q4 = corr.q2, corr.q3, corr.q4
    return CumulantSet(
        order2=-2.0 * q2,
        order3=4j * q3,
        order4_pc=8.0 * (q4 - q2 * q2),
        order4_oc=8.0 * (q4 - 3.0 * q2 * q2),
        second_squared=8.0 * q2 * q2,
    )


# -- TCL ---------------------------------------------------------------------

def tcl_exponent(q2, q3, q4, order, tau):
    """Return ``(log_envelope, angle)`` with ``c(tau) = exp(log_envelope + i angle) c(0)``."""
    _check_order(order)
    log_env = -2 * q2 * tau ** 2
    if order >= 4:
        log_env = log_env + (2 * q4 - 6 * q2 * q2) * tau ** 4 / 3
    angle = 0 * tau
    if order >= 3:
        angle = -4 * q3 * tau ** 3 / 3
    return log_env, angle


def _tcl_flags(spec, grid, points, tol):
    pair = coherence_factor(spec, None, grid)
    bad = invertibility_times(pair, tol)
    base = ["ok"] * grid.count
    if bad.size:
        start = int(np.searchsorted(grid.samples, bad[0]))
        base[start:] = ["tcl_invalid"] * (grid.count - start)
    return left_sphere_flags(points, base), (float(bad[0]) if bad.size else None)


def tcl_trajectory(spec: BathSpec, corr: CorrelationSet, v0: BlochVector, grid: TimeGrid,
                   order: int, invertibility_tol: float = 1e-6) -> BlochTrajectory:
    """Closed-form TCL2/3/4 solution.

    Samples from the first non-invertible time of the exact map onwards are
    flagged ``tcl_invalid``; samples outside the Bloch ball are flagged
    ``left_bloch_sphere`` (that flag takes precedence).
    """
    _check_order(order)
    tau = grid.samples
    log_env, angle = tcl_exponent(corr.q2, corr.q3, corr.q4, order, tau)
    with np.errstate(over="ignore", invalid="ignore"):
        envelope = np.exp(log_env)
        h = envelope if order == 2 else envelope * (np.cos(angle) + 1j * np.sin(angle))
        points = propagate(h, v0)
    flags, breakdown = _tcl_flags(spec, grid, points, invertibility_tol)
    return BlochTrajectory(
        grid,
        points,
        f"tcl{order}",
        flags,
        provenance={"bath": spec.digest(), "order": order, "invalid_from": breakdown},
    )


# -- NZ ----------------------------------------------------------------------

def nz2_trajectory(spec: BathSpec, corr: CorrelationSet, v0: BlochVector, grid: TimeGrid) -> BlochTrajectory:
    """Born (NZ2) closed form: ``v_{x,y}(t) = v_{x,y}(0) cos(2 sqrt(Q2) alpha t)``."""
    h = np.cos(2.0 * np.sqrt(corr.q2) * grid.samples)
    points = propagate(h, v0)
    return BlochTrajectory(grid, points, "nz2", left_sphere_flags(points),
                           provenance={"bath": spec.digest(), "order": 2, "solver": "closed_form"})


def nz_kernel_coefficients(q2, q3, q4, order):
    """``(a2, a3, a4)`` in ``dc/dtau = a2 I1[c] + a3 I2[c] + a4 I3[c]``."""
    _check_order(order)
    a2 = -4 * q2
    a3 = -8j * q3 if order >= 3 else 0
    a4 = 16 * (q4 - q2 * q2) if order >= 4 else 0
    return a2, a3, a4


def nz_system_matrix(q2, q3, q4, order):
    """Generator of ``y = (c, I1[c], ..., I_{order-1}[c])`` as nested lists."""
    coeffs = nz_kernel_coefficients(q2, q3, q4, order)
    rows = [[0] * order for _ in range(order)]
    for j in range(1, order):
        rows[0][j] = coeffs[j - 1]
        rows[j][j - 1] = 1
    return rows


def nz_coherence(corr: CorrelationSet, tau: np.ndarray, order: int) -> np.ndarray:
    """Multiplier of ``c`` under NZ``order`` at each ``tau`` (``expm`` per sample).

    Samples whose propagator overflows come back as NaN.
    """
    a = np.array(nz_system_matrix(corr.q2, corr.q3, corr.q4, order), dtype=complex)
    out = np.empty(len(tau), dtype=complex)
    with np.errstate(all="ignore"):
        for i, t in enumerate(np.asarray(tau, dtype=float)):
            out[i] = scipy.linalg.expm(a * t)[0, 0]
    out[~np.isfinite(out)] = np.nan
    return out


def nz_trajectory(spec: BathSpec, corr: CorrelationSet, v0: BlochVector, grid: TimeGrid,
                  order: int) -> BlochTrajectory:
    """Numerical NZ2/3/4 solution via the auxiliary-integral linear system."""
    _check_order(order)
    h = nz_coherence(corr, grid.samples, order)
    bad = np.isnan(h)
    if bad.any():
        first = int(np.argmax(bad))
        prior = np.abs(h[:first])
        if first == 0 or not np.any(prior > 1.0 + 1e-9):
            raise NumericalFailure(f"nz{order}", f"non-finite propagator at alpha*t = {grid.samples[first]:g}")
    points = propagate(h, v0)
    return BlochTrajectory(grid, points, f"nz{order}", left_sphere_flags(points),
                           provenance={"bath": spec.digest(), "order": order, "solver": "expm"})
