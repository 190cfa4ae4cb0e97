"""Bath parameterisation, thermal weights, random baths and time grids.

All times are the dimensionless product ``alpha * t``. Inverse temperature
``beta`` uses ``k = 1``; ``math.inf`` stands for zero temperature.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "SpecValidationError",
    "BathSpec",
    "ThermalWeights",
    "BlochVector",
    "TimeGrid",
    "EnsembleSpec",
    "GENERATOR_NAME",
    "validate_spec",
    "thermal_weights",
    "sample_random_bath",
    "make_time_grid",
]

GENERATOR_NAME = "numpy.random.PCG64(SeedSequence([seed, index]))"
BLOCH_NORM_EPS = 1e-12


class SpecValidationError(ValueError):
    """A parameter bundle was rejected; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


def _read_beta(value) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "zero-temperature"):
            return math.inf
        raise SpecValidationError("inv_temperature", f"cannot parse {value!r}")
    beta = float(value)
    if math.isnan(beta) or beta < 0:
        raise SpecValidationError("inv_temperature", "beta must be >= 0")
    return beta


@dataclass(frozen=True)
class BathSpec:
    """Validated model parameters: N spins with couplings g_n and frequencies Omega_n."""

    n_spins: int
    couplings: tuple[float, ...]
    frequencies: tuple[float, ...]
    inv_temperature: float
    coupling_strength: float

    @property
    def g(self) -> np.ndarray:
        return np.array(self.couplings, dtype=float)

    @property
    def omega(self) -> np.ndarray:
        return np.array(self.frequencies, dtype=float)

    @property
    def beta(self) -> float:
        return self.inv_temperature

    @property
    def alpha(self) -> float:
        return self.coupling_strength

    def with_beta(self, beta) -> "BathSpec":
        return validate_spec({**self.to_dict(), "inv_temperature": beta})

    def to_dict(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "couplings": list(self.couplings),
            "frequencies": list(self.frequencies),
            "inv_temperature": "inf" if math.isinf(self.inv_temperature) else self.inv_temperature,
            "coupling_strength": self.coupling_strength,
        }

    def digest(self) -> str:
        """Short content hash, stable across runs."""
        payload = json.dumps(
            {k: (v if not isinstance(v, list) else [repr(x) for x in v]) for k, v in self.to_dict().items()},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ThermalWeights:
    """Per-spin polarisations ``beta_n`` and the mean shift ``theta = sum g_n beta_n``."""

    weights: tuple[float, ...]
    mean_shift: float

    @property
    def b(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)

    @property
    def theta(self) -> float:
        return self.mean_shift


@dataclass(frozen=True)
class BlochVector:
    vx: float
    vy: float
    vz: float

    def __post_init__(self):
        norm2 = self.vx ** 2 + self.vy ** 2 + self.vz ** 2
        if not norm2 <= 1.0 + BLOCH_NORM_EPS:
            raise SpecValidationError("initial_bloch", f"|v|^2 = {norm2} exceeds 1")

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "BlochVector":
        if len(values) != 3:
            raise SpecValidationError("initial_bloch", "expected three components")
        return cls(*(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array([self.vx, self.vy, self.vz])

    @property
    def transverse_norm(self) -> float:
        return math.hypot(self.vx, self.vy)


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing samples of ``alpha * t``."""

    samples: np.ndarray
    scale: str = "linear"
    t_min: float = field(init=False)
    t_max: float = field(init=False)
    count: int = field(init=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("time grid must be a non-empty 1-d sequence")
        if samples[0] < 0 or np.any(np.diff(samples) <= 0):
            raise ValueError("time grid must be non-negative and strictly increasing")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "t_min", float(samples[0]))
        object.__setattr__(self, "t_max", float(samples[-1]))
        object.__setattr__(self, "count", int(samples.size))

    def __len__(self):
        return self.count

    def same_as(self, other: "TimeGrid") -> bool:
        return self.count == other.count and bool(np.array_equal(self.samples, other.samples))


@dataclass(frozen=True)
class EnsembleSpec:
    """Random baths drawn uniformly on [-1, 1] around a fixed template (N, alpha, beta)."""

    member_count: int
    seed: int
    base: BathSpec

    def __post_init__(self):
        if int(self.member_count) < 1:
            raise SpecValidationError("ensemble.count", "member_count must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise SpecValidationError("ensemble.seed", "seed must be a 64-bit unsigned integer")

    def members(self):
        return [sample_random_bath(self, i) for i in range(self.member_count)]


def validate_spec(raw: Mapping) -> BathSpec:
    """Build a :class:`BathSpec` from a plain mapping, rejecting bad values.

    Accepted keys are the field names of :class:`BathSpec`; ``beta`` and
    ``alpha`` are accepted as aliases.
    """
    data = dict(raw)
    if "beta" in data and "inv_temperature" not in data:
        data["inv_temperature"] = data.pop("beta")
    if "alpha" in data and "coupling_strength" not in data:
        data["coupling_strength"] = data.pop("alpha")

    for key in ("n_spins", "couplings", "frequencies", "inv_temperature", "coupling_strength"):
        if key not in data:
            raise SpecValidationError(key, "missing")

    try:
        n = int(data["n_spins"])
    except (TypeError, ValueError):
        raise SpecValidationError("n_spins", "must be an integer") from None
    if n < 1 or n != data["n_spins"]:
        raise SpecValidationError("n_spins", "must be a positive integer")

    couplings = tuple(float(x) for x in data["couplings"])
    frequencies = tuple(float(x) for x in data["frequencies"])
    if len(couplings) != n:
        raise SpecValidationError("couplings", f"length {len(couplings)} != n_spins {n}")
    if len(frequencies) != n:
        raise SpecValidationError("frequencies", f"length {len(frequencies)} != n_spins {n}")
    if not all(-1.0 <= x <= 1.0 for x in couplings):
        raise SpecValidationError("couplings", "coupling out of range [-1, 1]")
    if not all(-1.0 <= x <= 1.0 for x in frequencies):
        raise SpecValidationError("frequencies", "frequency out of range [-1, 1]")

    beta = _read_beta(data["inv_temperature"])
    alpha = float(data["coupling_strength"])
    if not alpha > 0 or math.isinf(alpha):
        raise SpecValidationError("coupling_strength", "alpha must be a finite positive number")

    return BathSpec(n, couplings, frequencies, beta, alpha)


def thermal_weights(spec: BathSpec) -> ThermalWeights:
    omega = spec.omega
    if math.isinf(spec.beta):
        b = -np.sign(omega)
    else:
        b = np.tanh(-0.5 * spec.beta * omega)
    b = b + 0.0  # normalise -0.0
    theta = float(np.dot(spec.g, b))
    return ThermalWeights(tuple(float(x) for x in b), theta)


def sample_random_bath(ensemble: EnsembleSpec, index: int) -> BathSpec:
    """Member ``index`` of the ensemble; a pure function of ``(seed, index)``."""
    if not 0 <= index < ensemble.member_count:
        raise IndexError(f"member index {index} outside [0, {ensemble.member_count})")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(ensemble.seed), int(index)])))
    n = ensemble.base.n_spins
    g = rng.uniform(-1.0, 1.0, n)
    omega = rng.uniform(-1.0, 1.0, n)
    return BathSpec(
        n,
        tuple(float(x) for x in g),
        tuple(float(x) for x in omega),
        ensemble.base.inv_temperature,
        ensemble.base.coupling_strength,
    )


def make_time_grid(t_min: float, t_max: float, count: int, scale: str = "linear") -> TimeGrid:
    """Linear or logarithmic grid that includes both endpoints."""
    scale = {"lin": "linear", "log": "logarithmic"}.get(scale, scale)
    if scale not in ("linear", "logarithmic"):
        raise ValueError(f"unknown grid scale {scale!r}")
    if count < 2:
        raise ValueError("a grid needs at least two samples")
    if not (t_max > t_min >= 0):
        raise ValueError(f"degenerate time range [{t_min}, {t_max}]")
    if scale == "logarithmic":
        if t_min <= 0:
            raise ValueError("logarithmic grids need t_min > 0")
        samples = np.geomspace(t_min, t_max, count)
    else:
        samples = np.linspace(t_min, t_max, count)
    samples[0], samples[-1] = t_min, t_max
    return TimeGrid(samples, scale)
