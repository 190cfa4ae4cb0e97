"""Bath correlation functions ``Q_k = Tr{B^k rho_B}`` and the spectral density.

``B = sum_n g_n sigma^z_n - theta`` is diagonal, so ``Q_k`` is the k-th
central moment of a sum of independent two-point variables. The production
path composes per-spin central moments; the enumeration over all ``2^N``
bath configurations is kept as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import BathSpec, thermal_weights

__all__ = [
    "MAX_MOMENT_ORDER",
    "MAX_ENUMERATION_SPINS",
    "CorrelationSet",
    "SpectralDensity",
    "moment",
    "moments",
    "moment_by_enumeration",
    "enumerate_configurations",
    "correlation_set",
    "spectral_density",
]

MAX_MOMENT_ORDER = 8
MAX_ENUMERATION_SPINS = 20


@dataclass(frozen=True)
class CorrelationSet:
    theta: float
    q2: float
    q3: float
    q4: float


@dataclass(frozen=True)
class SpectralDensity:
    """Discrete lines ``(Omega, |g|^2)``; equal frequencies are merged."""

    lines: tuple[tuple[float, float], ...]

    @property
    def total_weight(self) -> float:
        return math.fsum(w for _, w in self.lines)


def _check_order(k: int):
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= MAX_MOMENT_ORDER):
        raise ValueError(f"moment order must be an integer in [1, {MAX_MOMENT_ORDER}], got {k!r}")


def moments(spec: BathSpec, kmax: int) -> np.ndarray:
    """Array ``[Q_0, Q_1, ..., Q_kmax]`` with ``Q_0 = 1`` and ``Q_1 = 0``."""
    _check_order(kmax)
    tw = thermal_weights(spec)
    out = np.array(_kernels.sum_central_moments(spec.g, tw.b, kmax), dtype=float)
    out[1] = 0.0
    if kmax >= 2:
        # same float expression as the documented closed form
        out[2] = float(np.sum(spec.g ** 2 * (1.0 - tw.b ** 2)))
    return out


def moment(spec: BathSpec, k: int) -> float:
    _check_order(k)
    if k == 1:
        return 0.0
    return float(moments(spec, k)[k])


def enumerate_configurations(spec: BathSpec):
    """All ``2^N`` bath configurations of the thermal state.

    Returns ``(shifted, weights)``: the eigenvalues ``E~_l`` of ``B`` and
    the Gibbs probabilities ``exp(-beta E_l) / Z``. ``theta`` is computed
    here from the configurations themselves, not from ``beta_n``.
    """
    n = spec.n_spins
    if n > MAX_ENUMERATION_SPINS:
        raise ValueError(
            f"enumeration over 2^{n} configurations refused (oracle only, N <= {MAX_ENUMERATION_SPINS})"
        )
    idx = np.arange(2 ** n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    sz = 1.0 - 2.0 * bits  # bit 0 -> sigma^z = +1
    energies = sz @ (0.5 * spec.omega)
    coupling = sz @ spec.g

    if math.isinf(spec.beta):
        # degeneracy only comes from spins with Omega_n == 0, which add exact zeros
        weights = (energies == energies.min()).astype(float)
    else:
        weights = np.exp(-spec.beta * (energies - energies.min()))
    weights = weights / math.fsum(weights)
    theta = math.fsum(weights * coupling)
    return coupling - theta, weights


def moment_by_enumeration(spec: BathSpec, k: int) -> float:
    _check_order(k)
    shifted, weights = enumerate_configurations(spec)
    return math.fsum(weights * shifted ** k)


def correlation_set(spec: BathSpec) -> CorrelationSet:
    q = moments(spec, 4)
    return CorrelationSet(
        theta=thermal_weights(spec).theta,
        q2=float(q[2]),
        q3=float(q[3]),
        q4=float(q[4]),
    )


def spectral_density(spec: BathSpec, tol: float = 1e-12) -> SpectralDensity:
    lines: list[list[float]] = []
    for omega, g in sorted(zip(spec.frequencies, spec.couplings)):
        if g == 0.0:
            continue
        if lines and abs(omega - lines[-1][0]) <= tol:
            lines[-1][1] += g * g
        else:
            lines.append([omega, g * g])
    return SpectralDensity(tuple((w, weight) for w, weight in lines))
