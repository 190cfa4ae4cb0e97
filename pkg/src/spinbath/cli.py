"""Command-line entry point ``spinbath``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config, read_raw_config
from .harness import (
    beta_sweep,
    ensemble_distances,
    run_comparison,
    run_method,
    write_sweep_csv,
    write_trajectory_csv,
)
from .markovian import optimize_tau
from .model import EnsembleSpec, SpecValidationError
from .projection import NumericalFailure

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _float_list(text: str):
    return [float(x) for x in text.split(",") if x.strip()]


def _spec_or_list(text: str):
    return text if text.startswith(("uniform:", "random")) else _float_list(text)


def _beta(text: str):
    return "inf" if text.strip().lower() in ("inf", "infinity") else float(text)


def _common(p: argparse.ArgumentParser, config_required: bool = False):
    p.add_argument("--config", required=config_required, help="JSON run configuration")
    p.add_argument("--out", default="spinbath-out", help="output directory (default: %(default)s)")
    p.add_argument("--n-spins", type=int)
    p.add_argument("--couplings", type=_spec_or_list, help="comma list, uniform:<x> or random")
    p.add_argument("--frequencies", type=_spec_or_list, help="comma list, uniform:<x> or random")
    p.add_argument("--beta", type=_beta)
    p.add_argument("--alpha", type=float)
    p.add_argument("--grid-min", type=float)
    p.add_argument("--grid-max", type=float)
    p.add_argument("--grid-count", type=int)
    p.add_argument("--grid-scale", choices=("lin", "log"))
    p.add_argument("--initial-bloch", type=_float_list, help="vx,vy,vz")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinbath", description="Qubit dephasing in an Ising spin bath.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("exact", help="exact trajectory")
    _common(p)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("approx", help="one approximate method")
    _common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--method", required=True,
                   choices=("short_time", "nz", "tcl", "cg", "pm"), help="method family")
    p.add_argument("--order", type=int, choices=(2, 3, 4), help="expansion order for nz/tcl")
    p.add_argument("--kernel", default="optimal", choices=("optimal", "nz2", "second_order"),
                   help="memory kernel for pm")
    p.add_argument("--tau", type=float, help="coarse-graining time for cg (optimised when omitted)")

    p = sub.add_parser("compare", help="all configured methods against exact")
    _common(p, config_required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--methods", type=lambda s: [m for m in s.split(",") if m.strip()])

    p = sub.add_parser("sweep-beta", help="v_x at fixed alpha*t across inverse temperatures")
    _common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha-t", type=float, required=True)
    p.add_argument("--betas", type=_float_list, help="comma list (default: 25 log-spaced in [0.01, 10])")
    p.add_argument("--methods", type=lambda s: [m for m in s.split(",") if m.strip()])

    p = sub.add_parser("ensemble", help="random-bath ensemble averages")
    _common(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, help="number of members (default: config ensemble.count or 50)")
    p.add_argument("--methods", type=lambda s: [m for m in s.split(",") if m.strip()])
    p.add_argument("--tau", type=float, help="coarse-graining time when 'cg' is requested")

    p = sub.add_parser("cg-opt", help="optimal coarse-graining time")
    _common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", type=float, help="averaging horizon in alpha*t")
    return parser


def _overrides(args) -> dict:
    o = {
        "n_spins": args.n_spins,
        "couplings": args.couplings,
        "frequencies": args.frequencies,
        "beta": args.beta,
        "alpha": args.alpha,
        "initial_bloch": args.initial_bloch,
        "seed": getattr(args, "seed", None),
        "methods": getattr(args, "methods", None),
    }
    return {k: v for k, v in o.items() if v is not None}


def _grid_overrides(args, raw: dict) -> dict:
    grid = dict(raw.get("grid") or {})
    for key, val in (("min", args.grid_min), ("max", args.grid_max),
                     ("count", args.grid_count), ("scale", args.grid_scale)):
        if val is not None:
            grid[key] = val
    return grid


def _load(args) -> RunConfig:
    raw = read_raw_config(args.config) if args.config else {}
    raw.update(_overrides(args))
    raw["grid"] = _grid_overrides(args, raw)
    return parse_config(raw)


def _emit(args, label, traj):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = write_trajectory_csv(out / f"{label}.csv", label, traj)
    print(f"wrote {path}")


def _cmd_exact(args):
    cfg = _load(args)
    _emit(args, "exact", run_method("exact", cfg.spec, cfg.v0, cfg.grid))


def _cmd_approx(args):
    cfg = _load(args)
    if args.method in ("nz", "tcl"):
        if args.order is None:
            raise ConfigError(f"--order is required for --method {args.method}")
        label = f"{args.method}{args.order}"
    elif args.method == "pm":
        label = f"pm-{args.kernel}"
    else:
        label = args.method
    tau = args.tau if args.tau is not None else cfg.cg_tau
    traj = run_method(label, cfg.spec, cfg.v0, cfg.grid, tau=tau, optimise_cg=True)
    _emit(args, label, traj)


def _cmd_compare(args):
    cfg = _load(args)
    report = run_comparison(cfg, args.out, workers=args.workers)
    for label, value in report.summary.items():
        print(f"{label:>16s}  mean distance {value if value is None else format(value, '.6g')}")
    print(f"outputs in {args.out}")


def _cmd_sweep(args):
    cfg = _load(args)
    betas = args.betas if args.betas else list(np.geomspace(0.01, 10.0, 25))
    methods = args.methods if args.methods else list(cfg.methods)
    table = beta_sweep(cfg.spec, args.alpha_t, betas, methods, cfg.v0, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(f"wrote {write_sweep_csv(out / 'sweep_beta.csv', table)}")


def _cmd_ensemble(args):
    if args.count is not None and args.count < 1:
        raise ConfigError("--count must be >= 1")
    cfg = _load(args)
    count = args.count or (cfg.ensemble.member_count if cfg.ensemble else 50)
    ensemble = EnsembleSpec(count, args.seed, cfg.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for label in cfg.methods:
        mean_tr, dom, mod = ensemble_distances(ensemble, label, cfg.v0, cfg.grid, args.workers, tau=args.tau)
        write_trajectory_csv(out / f"{label}.csv", label, mean_tr)
        summary[label] = {"dist_of_mean": float(np.mean(dom)), "mean_of_dist": float(np.mean(mod))}
        print(f"{label:>16s}  dist_of_mean {summary[label]['dist_of_mean']:.6g}  "
              f"mean_of_dist {summary[label]['mean_of_dist']:.6g}")
    meta = {"seed": args.seed, "member_count": count, "n_spins": cfg.spec.n_spins}
    (out / "ensemble.json").write_text(json.dumps({"summary": summary, "metadata": meta}, indent=2,
                                                  sort_keys=True) + "\n")


def _cmd_cg_opt(args):
    cfg = _load(args)
    opt = optimize_tau(cfg.spec, cfg.v0, horizon=args.horizon)
    gen = opt.generator
    print(f"tau* = {opt.tau:.10g}  mean distance = {opt.mean_distance:.10g}  "
          f"omega~ = {gen.omega_tilde:.10g}  gamma~ = {gen.gamma_tilde:.10g}")
    traj = run_method("cg", cfg.spec, cfg.v0, cfg.grid, tau=opt.tau)
    _emit(args, "cg", traj)


COMMANDS = {
    "exact": _cmd_exact,
    "approx": _cmd_approx,
    "compare": _cmd_compare,
    "sweep-beta": _cmd_sweep,
    "ensemble": _cmd_ensemble,
    "cg-opt": _cmd_cg_opt,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.verb](args)
    except (ConfigError, SpecValidationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure in {exc.method}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
