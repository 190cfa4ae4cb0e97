"""JSON run configurations.

Schema::

    {"n_spins": int,
     "couplings": [float] | "uniform:<x>" | "random",
     "frequencies": [float] | "uniform:<x>" | "random",
     "beta": float | "inf",
     "alpha": float,
     "grid": {"min": float, "max": float, "count": int, "scale": "log" | "lin"},
     "ensemble": {"count": int, "seed": int},      # optional
     "initial_bloch": [vx, vy, vz],
     "methods": [str],                            # optional
     "seed": int,                                 # optional
     "cg_tau": float}                             # optional

``"random"`` entries are drawn from member 0 of an ensemble seeded by
``seed`` (or ``ensemble.seed``), so a seed is required for them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .model import (
    BathSpec,
    BlochVector,
    EnsembleSpec,
    SpecValidationError,
    TimeGrid,
    make_time_grid,
    sample_random_bath,
    validate_spec,
)

__all__ = ["ConfigError", "RunConfig", "DEFAULT_METHODS", "METHOD_LABELS", "parse_config", "read_raw_config", "load_config"]

DEFAULT_METHODS = ("exact", "nz2", "nz3", "nz4", "tcl2", "tcl3", "tcl4", "pm-optimal")
METHOD_LABELS = (
    "exact", "short_time", "nz2", "nz3", "nz4", "tcl2", "tcl3", "tcl4",
    "cg", "pm-optimal", "pm-nz2", "pm-second_order",
)


class ConfigError(ValueError):
    """The run configuration could not be parsed or validated."""


@dataclass(frozen=True, eq=False)
class RunConfig:
    spec: BathSpec
    grid: TimeGrid
    v0: BlochVector
    methods: tuple[str, ...] = DEFAULT_METHODS
    ensemble: EnsembleSpec | None = None
    seed: int | None = None
    cg_tau: float | None = None
    raw: dict = field(default_factory=dict)


def _expand(value, n: int, name: str):
    if isinstance(value, str):
        text = value.strip().lower()
        if text == "random":
            return None
        if text.startswith("uniform:"):
            try:
                x = float(text.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"{name}: cannot parse {value!r}") from None
            return [x] * n
        raise ConfigError(f"{name}: expected a list, 'uniform:<x>' or 'random', got {value!r}")
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{name}: expected a list, 'uniform:<x>' or 'random'")
    return [float(x) for x in value]


def _grid(raw) -> TimeGrid:
    if not isinstance(raw, Mapping):
        raise ConfigError("grid: expected an object with min, max, count, scale")
    try:
        return make_time_grid(float(raw["min"]), float(raw["max"]), int(raw["count"]), str(raw.get("scale", "lin")))
    except KeyError as exc:
        raise ConfigError(f"grid: missing {exc.args[0]}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid: {exc}") from None


def parse_config(raw: Mapping) -> RunConfig:
    """Validate a configuration mapping; every failure raises :class:`ConfigError`."""
    if not isinstance(raw, Mapping):
        raise ConfigError("configuration must be a JSON object")
    try:
        return _parse(dict(raw))
    except SpecValidationError as exc:
        raise ConfigError(str(exc)) from None


def _parse(raw: dict) -> RunConfig:
    for key in ("n_spins", "couplings", "frequencies", "beta", "alpha", "grid", "initial_bloch"):
        if key not in raw:
            raise ConfigError(f"{key}: missing")
    n = raw["n_spins"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("n_spins: must be a positive integer")

    seed = raw.get("seed")
    ensemble_raw = raw.get("ensemble")
    if seed is None and isinstance(ensemble_raw, Mapping):
        seed = ensemble_raw.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise ConfigError("seed: must be a non-negative integer")

    g = _expand(raw["couplings"], n, "couplings")
    w = _expand(raw["frequencies"], n, "frequencies")
    template = validate_spec({
        "n_spins": n,
        "couplings": g if g is not None else [0.0] * n,
        "frequencies": w if w is not None else [0.0] * n,
        "beta": raw["beta"],
        "alpha": raw["alpha"],
    })
    if g is None or w is None:
        if seed is None:
            raise ConfigError("seed: required when couplings or frequencies are 'random'")
        drawn = sample_random_bath(EnsembleSpec(1, seed, template), 0)
        template = validate_spec({
            **template.to_dict(),
            "couplings": g if g is not None else list(drawn.couplings),
            "frequencies": w if w is not None else list(drawn.frequencies),
        })

    ensemble = None
    if ensemble_raw is not None:
        if not isinstance(ensemble_raw, Mapping) or "count" not in ensemble_raw:
            raise ConfigError("ensemble: expected an object with count and seed")
        ens_seed = ensemble_raw.get("seed", seed)
        if ens_seed is None:
            raise ConfigError("ensemble.seed: required for ensemble runs")
        ensemble = EnsembleSpec(int(ensemble_raw["count"]), int(ens_seed), template)

    methods = tuple(raw.get("methods", DEFAULT_METHODS))
    if not methods:
        raise ConfigError("methods: empty method list")
    unknown = [m for m in methods if m not in METHOD_LABELS]
    if unknown:
        raise ConfigError(f"methods: unknown method(s) {unknown}; expected from {list(METHOD_LABELS)}")

    v0_raw = raw["initial_bloch"]
    if not isinstance(v0_raw, (list, tuple)):
        raise ConfigError("initial_bloch: expected three numbers")
    v0 = BlochVector.from_sequence([float(x) for x in v0_raw])

    cg_tau = raw.get("cg_tau")
    if cg_tau is not None:
        cg_tau = float(cg_tau)
        if not cg_tau > 0 or math.isinf(cg_tau):
            raise ConfigError("cg_tau: must be a finite positive number")

    return RunConfig(template, _grid(raw["grid"]), v0, methods, ensemble, seed, cg_tau, dict(raw))


def read_raw_config(path) -> dict:
    """Parse a JSON configuration file without validating it."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    return raw


def load_config(path, overrides: Mapping | None = None) -> RunConfig:
    """Read a JSON file, apply ``overrides`` (top-level keys replace file values) and validate."""
    raw = read_raw_config(path)
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return parse_config(raw)
