"""Command-line front end: run experiments, verify estimate invariants,
track characteristics, run the alignment system, check the slab reduction,
print calibrated constants, and sweep parameters.

Configs are flat key = value files (TOML-compatible scalars); command-line
flags override file values.  Exit codes: 0 success, 1 malformed config,
2 invariant failure in verify mode, 3 stopped under-resolved when the run
was required to reach t_end.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .characteristics import advect_path, check_decay_bound, check_mass_transport
from .diagnostics import classify_run, constants_for, make_observer
from .extensions import run_alignment, slab_check_2d
from .grid import make_grid, spectral_derivative
from .initial_data import InitialDataSpec, make_initial_data, validate_hypotheses
from .operators import (compute_A, compute_C, compute_delta, kernel_tail_bound,
                        make_params, velocity_spectral)
from .output import fmt, write_csv, write_metadata, write_snapshot, write_timeseries
from .solver import SolverConfig, run
from .svgplot import line_chart

PRESETS = ("cccf", "vacuum-plateau", "positive-control", "smooth-monotone")


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    """Parse a flat key = value file; values are TOML-style scalars."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        out[key] = _parse_scalar(value)
    return out


def _parse_scalar(text: str):
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    if (text.startswith('"') and text.endswith('"')) or \
       (text.startswith("'") and text.endswith("'")):
        return text[1:-1]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", type=str, help="flat key = value config file")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int, dest="n_points")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--cfl", type=float)
    p.add_argument("--tail-threshold", type=float, dest="tail_threshold")
    p.add_argument("--snapshot-interval", type=float, dest="snapshot_interval")
    p.add_argument("--dealias-fraction", type=float, dest="dealias_fraction")
    p.add_argument("--rho-max", type=float, dest="rho_max")
    p.add_argument("--x0", type=float)
    p.add_argument("--width", type=float)
    p.add_argument("--offset", type=float)
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--require-t-end", action="store_true", dest="require_t_end")
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--snapshot-stride", type=int, default=10,
                   help="write every k-th snapshot CSV")
    p.add_argument("--out", type=str, default="out")


_DEFAULTS = dict(preset="cccf", alpha=1.0, n_points=1024, t_end=0.5, cfl=0.4,
                 dealias_fraction=2.0 / 3.0, tail_threshold=1e-8,
                 snapshot_interval=None, rho_max=2.0, x0=0.15, width=0.1,
                 offset=1.5, max_steps=20_000_000, require_t_end=False)


def _settings(args) -> dict:
    settings = dict(_DEFAULTS)
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        unknown = set(cfg) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        settings.update(cfg)
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and not (key == "require_t_end" and value is False):
            settings[key] = value
    return settings


def _initial_spec(settings) -> InitialDataSpec:
    kind = settings["preset"].replace("-", "_")
    return InitialDataSpec(kind=kind, rho_max=settings["rho_max"],
                           x0=settings["x0"],
                           transition_width=settings["width"],
                           offset=settings["offset"])


def _solver_config(settings) -> SolverConfig:
    return SolverConfig(alpha=settings["alpha"], n_points=settings["n_points"],
                        t_end=settings["t_end"], cfl=settings["cfl"],
                        dealias_fraction=settings["dealias_fraction"],
                        tail_threshold=settings["tail_threshold"],
                        snapshot_interval=settings["snapshot_interval"],
                        max_steps=settings["max_steps"])


def _execute(settings):
    grid = make_grid(settings["n_points"])
    rho0 = make_initial_data(grid, _initial_spec(settings))
    config = _solver_config(settings)
    constants = constants_for(settings["alpha"], rho0)
    t0 = time.time()
    result = run(rho0, config, observers=(make_observer(constants),))
    wall = time.time() - t0
    return rho0, config, constants, result, wall


def _write_artifacts(settings, out_dir: Path, config, result, wall,
                     stride=10, plots=True):
    out_dir.mkdir(parents=True, exist_ok=True)
    write_timeseries(out_dir / "timeseries.csv", result.records)
    for i, state in enumerate(result.states):
        if i % max(1, stride) == 0 or i == len(result.states) - 1:
            write_snapshot(out_dir / f"snapshot_{i:04d}.csv", state)
    write_metadata(out_dir / "metadata.json", {
        "settings": settings, "stop_reason": result.stop_reason,
        "wall_time": wall, "steps": result.final_state.step_count,
        "t_final": result.final_state.t,
    })
    if plots:
        xs = result.states[0].rho.grid.nodes
        picks = result.states[:: max(1, len(result.states) // 6)]
        line_chart([(xs, s.rho.values, f"t={s.t:.4g}") for s in picks],
                   out_dir / "rho_snapshots.svg", title="density snapshots",
                   xlabel="x", ylabel="rho")
        ts = [r.t for r in result.records]
        line_chart([(ts, [r.c1_norm for r in result.records], "max |d_x rho|")],
                   out_dir / "c1_norm.svg", title="gradient norm",
                   xlabel="t", ylabel="c1", logy=True)


def cmd_simulate(args) -> int:
    settings = _settings(args)
    out_dir = Path(args.out)
    rho0, config, constants, result, wall = _execute(settings)
    _write_artifacts(settings, out_dir, config, result, wall,
                     stride=args.snapshot_stride, plots=not args.no_plots)
    print(f"stop_reason={result.stop_reason} t={result.final_state.t:.6g} "
          f"steps={result.final_state.step_count} artifacts in {out_dir}")
    if settings["require_t_end"] and result.stop_reason == "under_resolved":
        return 3
    return 0


_INVARIANT_TOLS = dict(mass_drift=1e-11, rho_min=1e-8, rho_max=1e-8,
                       monotonicity=1e-6, velocity_sign=1e-8,
                       enhanced_margin=1e-6)


def check_invariants(records, constants, tail_threshold,
                     monotone_data: bool = True) -> dict:
    """Per-invariant margins over the resolved window of a record series.

    The sign and monotonicity estimates only apply to even monotone data;
    for other data they are reported informationally but not enforced.
    """
    resolved = [r for r in records if r.tail_fraction <= tail_threshold]
    if not resolved:
        return {"resolved_records": 0, "all_ok": False}
    m0 = resolved[0].mass
    rho_max0 = constants.rho_max
    checks = {
        "mass_drift": max(abs(r.mass - m0) for r in resolved) <= _INVARIANT_TOLS["mass_drift"],
        "rho_min": all(r.rho_min >= -_INVARIANT_TOLS["rho_min"] * rho_max0 for r in resolved),
        "rho_max": all(r.rho_max <= rho_max0 * (1 + _INVARIANT_TOLS["rho_max"]) for r in resolved),
    }
    if monotone_data:
        checks.update({
            "monotonicity": all(r.zeta_min_half >= -_INVARIANT_TOLS["monotonicity"]
                                * max(r.c1_norm, 1e-300) for r in resolved),
            "velocity_sign": all(r.u_max_on_delta <= _INVARIANT_TOLS["velocity_sign"]
                                 for r in resolved),
            "enhanced_margin": all(r.enhanced_margin <= _INVARIANT_TOLS["enhanced_margin"]
                                   for r in resolved),
        })
    report = {"resolved_records": len(resolved), "checks": checks,
              "margins": {
                  "mass_drift": max(abs(r.mass - m0) for r in resolved),
                  "rho_min": min(r.rho_min for r in resolved),
                  "rho_max": max(r.rho_max for r in resolved),
                  "zeta_min_over_c1": min(r.zeta_min_half / max(r.c1_norm, 1e-300)
                                          for r in resolved),
                  "u_max_on_delta": max(r.u_max_on_delta for r in resolved),
                  "enhanced_margin": max(r.enhanced_margin for r in resolved),
              },
              "all_ok": all(checks.values())}
    return report


def cmd_verify(args) -> int:
    settings = _settings(args)
    out_dir = Path(args.out)
    rho0, config, constants, result, wall = _execute(settings)
    hyp = validate_hypotheses(rho0)
    report = check_invariants(result.records, constants, config.tail_threshold,
                              monotone_data=hyp.h1 and hyp.h3)
    report["hypotheses"] = {"h1": hyp.h1, "h2": hyp.h2, "h3": hyp.h3}
    report["stop_reason"] = result.stop_reason
    report["verdict"] = classify_run(result.records) if len(result.records) >= 10 else None
    _write_artifacts(settings, out_dir, config, result, wall,
                     stride=args.snapshot_stride, plots=not args.no_plots)
    print(json.dumps(report, indent=2, default=str))
    if not report["all_ok"]:
        return 2
    if settings["require_t_end"] and result.stop_reason == "under_resolved":
        return 3
    return 0


def cmd_characteristics(args) -> int:
    settings = _settings(args)
    out_dir = Path(args.out)
    starts = [float(s) for s in args.x_start.split(",")]
    rho0, config, constants, result, wall = _execute(settings)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [advect_path(result.states, xs) for xs in starts]
    for xs, path in zip(starts, paths):
        bound = path.x_start * np.exp(-constants.A * path.times)
        rows = zip(path.times, path.positions, path.mass_along, bound)
        write_csv(out_dir / f"path_{xs:+.4f}.csv".replace("+", ""),
                  ("t", "X", "mass_along", "decay_bound"), rows)
    reports = [check_decay_bound(p, constants.A, constants.m,
                                 delta=constants.delta) for p in paths]
    drift = None
    if len(paths) >= 2:
        drift = check_mass_transport(paths[0], paths[1], result.states)
    write_metadata(out_dir / "metadata.json", {
        "settings": settings, "x_start": starts,
        "stop_reason": result.stop_reason, "wall_time": wall,
        "decay_reports": [r.__dict__ for r in reports],
        "pair_mass_drift": drift,
    })
    print(json.dumps({"decay_reports": [r.__dict__ for r in reports],
                      "pair_mass_drift": drift}, indent=2, default=str))
    return 0


def cmd_align(args) -> int:
    settings = _settings(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = make_grid(settings["n_points"])
    rho0 = make_initial_data(grid, _initial_spec(settings))
    u0 = velocity_spectral(rho0, settings["alpha"])
    config = _solver_config(settings)
    t0 = time.time()
    result = run_alignment(rho0, u0, config)
    wall = time.time() - t0
    rows = []
    for s in result.states:
        g_norm = float(np.max(np.abs(s.G.values)))
        dux = float(np.max(np.abs(spectral_derivative(s.u).values)))
        rows.append((s.t, float(s.rho.values.min()), float(s.rho.values.max()),
                     g_norm, g_norm / max(dux, 1e-300)))
    write_csv(out_dir / "alignment_timeseries.csv",
              ("t", "rho_min", "rho_max", "g_norm", "g_over_dux"), rows)
    write_metadata(out_dir / "metadata.json", {
        "settings": settings, "stop_reason": result.stop_reason,
        "wall_time": wall, "t_final": result.final_state.t,
    })
    print(f"stop_reason={result.stop_reason} records={len(result.states)} "
          f"max g_norm={max(r[3] for r in rows):.3e}")
    return 0


def cmd_reduce(args) -> int:
    settings = _settings(args)
    grid = make_grid(settings["n_points"])
    rho0 = make_initial_data(grid, _initial_spec(settings))
    report = slab_check_2d(rho0, settings["alpha"])
    payload = {
        "alpha": settings["alpha"], "n": settings["n_points"],
        "u2_max": report.u2_max, "u1_mismatch": report.u1_mismatch,
        "c_prime": report.c_prime_value,
        "real_space_ratio": report.real_space_ratio,
        "real_space_rel_err": report.real_space_rel_err,
        "spectral_gap": report.spectral_gap,
    }
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_metadata(out_dir / "slab_report.json", payload)
    print(json.dumps(payload, indent=2))
    return 0


def cmd_constants(args) -> int:
    params = make_params(args.alpha, kernel_truncation=args.images,
                         quadrature_points=args.quadrature_points)
    payload = {
        "alpha": args.alpha,
        "c_alpha": params.c_alpha,
        "c_velocity": params.c_velocity,
        "C": compute_C(args.alpha),
        "delta": compute_delta(args.alpha),
        "A": compute_A(args.alpha, args.m, args.rho_max),
        "image_truncation": params.kernel_truncation,
        "truncation_tail_bound": kernel_tail_bound(params, args.rho_max),
    }
    print(json.dumps(payload, indent=2))
    return 0


def cmd_sweep(args) -> int:
    settings = _settings(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    axis = args.axis
    values = [_parse_scalar(v) for v in args.values.split(",")] if args.values else []
    key = {"alpha": "alpha", "n_points": "n_points", "x0": "x0",
           "offset": "offset"}[axis]
    rows = []
    for value in values:
        row_settings = dict(settings)
        row_settings[key] = value
        try:
            rho0, config, constants, result, wall = _execute(row_settings)
            if len(result.records) >= 10:
                verdict = classify_run(result.records)
            else:
                verdict = {"verdict": "inconclusive", "growth_factor": math.nan}
            inv = check_invariants(result.records, constants, config.tail_threshold)
            rows.append((value, verdict["verdict"], verdict["growth_factor"],
                         result.stop_reason, result.final_state.t,
                         inv["margins"]["rho_min"] if inv.get("margins") else math.nan,
                         inv["margins"]["u_max_on_delta"] if inv.get("margins") else math.nan,
                         "" if inv["all_ok"] else "invariant_failure"))
        except Exception as exc:  # keep sweeping, record the failure
            rows.append((value, "error", math.nan, "error", math.nan,
                         math.nan, math.nan, type(exc).__name__))
    header = (axis, "verdict", "growth_factor", "stop_reason", "t_final",
              "rho_min", "u_max_on_delta", "note")
    path = out_dir / "sweep.csv"
    lines = [",".join(header)]
    for row in rows:
        cells = [str(row[0]), str(row[1]), fmt(row[2]) if isinstance(row[2], float) else str(row[2]),
                 str(row[3]), fmt(row[4]), fmt(row[5]), fmt(row[6]), str(row[7])]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    print(f"sweep table: {path} ({len(rows)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpmflow",
        description="pseudo-spectral runs and estimate verification for the "
                    "1D nonlocal continuity flow")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run and write artifacts")
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run and check estimate invariants")
    _add_run_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("characteristics", help="run and trace characteristic paths")
    _add_run_flags(p)
    p.add_argument("--x-start", type=str, default="0.05,0.25",
                   help="comma-separated start points")
    p.set_defaults(func=cmd_characteristics)

    p = sub.add_parser("align", help="run the coupled alignment system")
    _add_run_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("reduce", help="2D slab reduction checks")
    _add_run_flags(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("constants", help="print calibrated constants as JSON")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--rho-max", type=float, default=2.0, dest="rho_max")
    p.add_argument("--images", type=int, default=64)
    p.add_argument("--quadrature-points", type=int, default=64,
                   dest="quadrature_points")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("sweep", help="sweep one parameter, one run per value")
    _add_run_flags(p)
    p.add_argument("--axis", choices=("alpha", "n_points", "x0", "offset"),
                   required=True)
    p.add_argument("--values", type=str, required=True,
                   help="comma-separated values")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
