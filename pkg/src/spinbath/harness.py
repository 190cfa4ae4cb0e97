"""Metrics, method dispatch, sweeps, ensembles and file output.

Method labels used throughout (and in CSV files):

``exact``, ``short_time``, ``nz2``-``nz4``, ``tcl2``-``tcl4``, ``cg``
(coarse grained, with an explicit or optimised ``tau``), ``pm-optimal``,
``pm-nz2`` and ``pm-second_order``.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._accel import backend_name
from .config import METHOD_LABELS, RunConfig
from .correlations import correlation_set
from .exact import FLAGS, BlochTrajectory, exact_trajectory, left_sphere_flags, short_time_trajectory
from .markovian import cg_generator, cg_trajectory, optimize_tau
from .model import GENERATOR_NAME, BathSpec, BlochVector, EnsembleSpec, TimeGrid, make_time_grid
from .postmarkov import KernelSpec, pm_response, pm_trajectory
from .projection import nz2_trajectory, nz_trajectory, tcl_trajectory

__all__ = [
    "CSV_HEADER",
    "ComparisonReport",
    "BetaSweepTable",
    "trace_distance",
    "trace_distances",
    "avg_trace_distance",
    "run_method",
    "ensemble_average",
    "ensemble_distances",
    "beta_sweep",
    "run_comparison",
    "write_trajectory_csv",
    "read_trajectory_csv",
]

CSV_HEADER = ("alpha_t", "method", "vx", "vy", "vz", "flag")
HORIZON_SLACK = 1e-12


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- metrics -------------------------------------------------------------------

def _as_vec(v) -> np.ndarray:
    if isinstance(v, BlochVector):
        return v.as_array()
    return np.asarray(v, dtype=float)


def trace_distance(a, b) -> float:
    """Qubit trace distance: half the Euclidean distance of the Bloch vectors."""
    d = _as_vec(a) - _as_vec(b)
    return 0.5 * math.hypot(*(float(x) for x in d))  # hypot avoids underflow of tiny differences


def trace_distances(traj_a: BlochTrajectory, traj_b: BlochTrajectory) -> np.ndarray:
    if not traj_a.grid.same_as(traj_b.grid):
        raise ValueError("trajectories are sampled on different grids")
    d = traj_a.points - traj_b.points
    return 0.5 * np.hypot(np.hypot(d[:, 0], d[:, 1]), d[:, 2])


def avg_trace_distance(traj_a: BlochTrajectory, traj_b: BlochTrajectory, horizon: float | None = None) -> float:
    """Mean of the per-sample trace distance over samples with ``alpha t <= horizon``."""
    d = trace_distances(traj_a, traj_b)
    samples = traj_a.grid.samples
    if horizon is None:
        return float(np.mean(d))
    if not samples[0] <= horizon <= samples[-1] * (1 + HORIZON_SLACK):
        raise ValueError(f"horizon {horizon} lies outside the grid [{samples[0]}, {samples[-1]}]")
    mask = samples <= horizon * (1 + HORIZON_SLACK)
    return float(np.mean(d[mask]))


# -- dispatch ------------------------------------------------------------------

def run_method(label: str, spec: BathSpec, v0: BlochVector, grid: TimeGrid, tau: float | None = None,
               optimise_cg: bool = False) -> BlochTrajectory:
    """Trajectory of one method on ``grid``.

    ``cg`` needs ``tau`` unless ``optimise_cg`` is set, in which case the
    mean-distance-optimal ``tau`` is searched first.
    """
    if label not in METHOD_LABELS:
        raise ValueError(f"unknown method {label!r}")
    if label == "exact":
        return exact_trajectory(spec, v0, grid)
    if label == "short_time":
        return short_time_trajectory(spec, v0, grid)
    corr = correlation_set(spec)
    if label == "nz2":
        return nz2_trajectory(spec, corr, v0, grid)
    if label in ("nz3", "nz4"):
        return nz_trajectory(spec, corr, v0, grid, int(label[-1]))
    if label.startswith("tcl"):
        return tcl_trajectory(spec, corr, v0, grid, int(label[-1]))
    if label == "cg":
        if tau is None:
            if not optimise_cg:
                raise ValueError("method 'cg' needs a coarse-graining time tau")
            tau = optimize_tau(spec, v0).tau
        return cg_trajectory(cg_generator(spec, tau), v0, grid)
    kernel = KernelSpec.optimal() if label == "pm-optimal" else KernelSpec.named(label[3:])
    return pm_trajectory(pm_response(kernel, corr, spec, grid), v0)


def _mean_trajectory(trajs: Sequence[BlochTrajectory], label: str, provenance: dict) -> BlochTrajectory:
    total = np.zeros_like(trajs[0].points)
    for tr in trajs:  # fixed order keeps the sum bit-reproducible
        total = total + tr.points
    points = total / len(trajs)
    base = []
    for i in range(trajs[0].grid.count):
        flags = {tr.flags[i] for tr in trajs} - {"ok"}
        base.append(next((f for f in FLAGS[1:] if f in flags), "ok"))
    return BlochTrajectory(trajs[0].grid, points, trajs[0].method_tag, left_sphere_flags(points, base),
                           provenance={"method": label, **provenance})


def _member_runs(ensemble: EnsembleSpec, label: str, v0, grid, tau, workers: int):
    members = ensemble.members()
    run = lambda spec: run_method(label, spec, v0, grid, tau=tau)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, members))
    return [run(spec) for spec in members]


def ensemble_average(ensemble: EnsembleSpec, method_tag: str, v0: BlochVector, grid: TimeGrid,
                     workers: int = 1, tau: float | None = None) -> BlochTrajectory:
    """Pointwise mean of the Bloch vector over the members of ``ensemble``."""
    if method_tag == "cg" and tau is None:
        raise ValueError("method 'cg' is unavailable for ensembles without an explicit tau")
    runs = _member_runs(ensemble, method_tag, v0, grid, tau, workers)
    return _mean_trajectory(runs, method_tag, {
        "member_count": ensemble.member_count, "seed": ensemble.seed, "generator": GENERATOR_NAME,
    })


def ensemble_distances(ensemble: EnsembleSpec, method_tag: str, v0: BlochVector, grid: TimeGrid,
                       workers: int = 1, tau: float | None = None):
    """Both ensemble distance conventions against the exact solution.

    Returns ``(mean_trajectory, dist_of_mean, mean_of_dist)`` where
    ``dist_of_mean`` is the distance between averaged trajectories and
    ``mean_of_dist`` the average of per-member distances.
    """
    if method_tag == "cg" and tau is None:
        raise ValueError("method 'cg' is unavailable for ensembles without an explicit tau")
    runs = _member_runs(ensemble, method_tag, v0, grid, tau, workers)
    exact = _member_runs(ensemble, "exact", v0, grid, None, workers)
    meta = {"member_count": ensemble.member_count, "seed": ensemble.seed, "generator": GENERATOR_NAME}
    mean_run = _mean_trajectory(runs, method_tag, meta)
    mean_exact = _mean_trajectory(exact, "exact", meta)
    total = np.zeros(grid.count)
    for a, b in zip(runs, exact):
        total = total + trace_distances(a, b)
    return mean_run, trace_distances(mean_run, mean_exact), total / len(runs)


# -- beta sweep ----------------------------------------------------------------

@dataclass(frozen=True)
class BetaSweepTable:
    alpha_t: float
    rows: tuple[tuple[float, str, float, str], ...]  # (beta, method, vx, flag)

    def value(self, beta: float, method: str) -> float:
        for b, m, vx, _ in self.rows:
            if b == beta and m == method:
                return vx
        raise KeyError((beta, method))


def beta_sweep(template: BathSpec, alpha_t_fixed: float, beta_values, methods: Sequence[str],
               v0: BlochVector, samples: int = 257, workers: int = 1) -> BetaSweepTable:
    """``v_x`` at a fixed ``alpha t`` for every ``(beta, method)`` pair.

    Each method runs on ``[0, alpha_t_fixed]`` so that history-dependent
    flags (TCL validity) are resolved; the final sample is reported.
    """
    if not alpha_t_fixed > 0:
        raise ValueError("alpha_t_fixed must be positive")
    betas = [float(b) for b in beta_values]
    if any(not b > 0 for b in betas):
        raise ValueError("beta values must be positive")
    grid = make_time_grid(0.0, alpha_t_fixed, samples, "linear")

    def point(beta):
        spec = template.with_beta(beta)
        out = []
        for m in methods:
            tr = run_method(m, spec, v0, grid, optimise_cg=True)
            out.append((beta, m, float(tr.vx[-1]), tr.flags[-1]))
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(point, betas))
    else:
        chunks = [point(b) for b in betas]
    return BetaSweepTable(float(alpha_t_fixed), tuple(r for chunk in chunks for r in chunk))


# -- comparison ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Trajectories, distances to the exact solution and their horizon means."""

    runs: list
    distances: dict
    summary: dict
    metadata: dict
    ensemble_metrics: dict = field(default_factory=dict)

    def trajectory(self, label: str) -> BlochTrajectory:
        for name, tr in self.runs:
            if name == label:
                return tr
        raise KeyError(label)


def run_comparison(config: RunConfig, output_dir=None, workers: int = 1) -> ComparisonReport:
    """Run every configured method on the shared grid and compare against ``exact``."""
    grid, v0 = config.grid, config.v0
    labels = list(config.methods)
    tau = config.cg_tau
    if "cg" in labels and tau is None:
        tau = optimize_tau(config.spec, v0).tau

    runs, distances, summary, ens_metrics = [], {}, {}, {}
    if config.ensemble is None:
        exact = exact_trajectory(config.spec, v0, grid)
        for label in labels:
            tr = exact if label == "exact" else run_method(label, config.spec, v0, grid, tau=tau)
            runs.append((label, tr))
            distances[label] = trace_distances(tr, exact)
    else:
        exact, _, _ = ensemble_distances(config.ensemble, "exact", v0, grid, workers)
        for label in labels:
            mean_tr, dom, mod = ensemble_distances(config.ensemble, label, v0, grid, workers, tau=tau)
            runs.append((label, mean_tr))
            distances[label] = dom
            ens_metrics[label] = {"dist_of_mean": _finite_or_none(np.mean(dom)),
                                  "mean_of_dist": _finite_or_none(np.mean(mod))}
    for label, d in distances.items():
        summary[label] = _finite_or_none(np.mean(d))

    metadata = {
        "bath_digest": config.spec.digest(),
        "seed": config.seed if config.ensemble is None else config.ensemble.seed,
        "generator": GENERATOR_NAME,
        "backend": backend_name(),
        "cg_tau": tau,
        "config": config.raw,
    }
    report = ComparisonReport(runs, distances, summary, metadata, ens_metrics)
    if output_dir is not None:
        write_report(report, output_dir)
    return report


def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


# -- files ---------------------------------------------------------------------

def write_trajectory_csv(path, label: str, traj: BlochTrajectory) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for t, (vx, vy, vz), flag in zip(traj.grid.samples, traj.points, traj.flags):
            w.writerow((_fmt(t), label, _fmt(vx), _fmt(vy), _fmt(vz), flag))
    return path


def read_trajectory_csv(path):
    """Parse a trajectory file into ``(alpha_t, method, points, flags)``."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        rows = list(reader)
    alpha_t = np.array([float(r[0]) for r in rows])
    points = np.array([[float(r[2]), float(r[3]), float(r[4])] for r in rows]).reshape(-1, 3)
    methods = {r[1] for r in rows}
    if len(methods) > 1:
        raise ValueError("file mixes several methods")
    return alpha_t, (methods.pop() if methods else ""), points, tuple(r[5] for r in rows)


def write_distance_csv(path, report: ComparisonReport) -> Path:
    """Wide table: ``alpha_t`` plus the distance to ``exact`` of every other method."""
    labels = [name for name, _ in report.runs if name != "exact"]
    grid = report.runs[0][1].grid
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha_t"] + labels)
        for i, t in enumerate(grid.samples):
            w.writerow([_fmt(t)] + [_fmt(report.distances[m][i]) for m in labels])
    return path


def write_report(report: ComparisonReport, output_dir) -> list[Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [write_trajectory_csv(out / f"{label}.csv", label, tr) for label, tr in report.runs]
    files.append(write_distance_csv(out / "distances.csv", report))
    payload = {
        "summary": report.summary,
        "ensemble": report.ensemble_metrics,
        "files": [p.name for p in files],
        "metadata": {**report.metadata, "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()},
    }
    report_path = out / "report.json"
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return files + [report_path]


def write_sweep_csv(path, table: BetaSweepTable) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("beta", "alpha_t", "method", "vx", "flag"))
        for beta, m, vx, flag in table.rows:
            w.writerow((_fmt(beta), _fmt(table.alpha_t), m, _fmt(vx), flag))
    return path
