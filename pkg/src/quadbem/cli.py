"""Command-line interface.

Subcommands
-----------
simulate   closed-loop run from a YAML config, writing a flight-log CSV
evaluate   force/torque RMSE table of model cells against flight logs
sweep      closed-loop positional-RMSE table over trajectories x models
charmap    BEM thrust/H-force/torque map over an operating-point grid
plot       extract channel series from a flight-log CSV for plotting

Exit codes: 0 success, 2 crash detected in simulation, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np
import yaml

from . import config as cfg
from .bem import RotorOperatingPoint, bem_wrench_from_op, build_quadrature, propeller_frame_inflow
from .core import QuadrotorState
from .errors import SolverFailureError
from .harness import (
    METRIC_KEYS,
    ControllerGains,
    SimConfig,
    TrajectorySpec,
    closed_loop_rmse,
    identify_quadratic_from_bem,
    track_and_simulate,
)
from .harness.metrics import wrench_rmse_arrays
from .pipeline.flightlog import FLIGHTLOG_COLUMNS, FlightLog
from .residual import build_architecture, history_from_dense, load_bundle, predict_residual
from .residual.history import decimation_offsets
from .rotor_quadratic import quadratic_rotor_wrench

EXIT_OK = 0
EXIT_CRASH = 2
EXIT_SOLVER = 3

MODEL_CELLS = ("none", "fit", "bem", "none+nn", "fit+nn", "bem+nn")

DEFAULT_SWEEP = [
    ("lemniscate-slow", TrajectorySpec(family="lemniscate", speed_scale=1.0)),
    ("lemniscate-fast", TrajectorySpec(family="lemniscate", speed_scale=2.5)),
    ("ellipse", TrajectorySpec(family="ellipse", speed_scale=2.0)),
    ("slanted-circle", TrajectorySpec(family="slanted-circle", speed_scale=2.0)),
    ("linear-oscillation", TrajectorySpec(family="linear-oscillation", speed_scale=2.0)),
    ("race-track", TrajectorySpec(family="race-track", speed_scale=1.5)),
    ("random-points", TrajectorySpec(family="random-points", speed_scale=1.0, seed=7)),
]


def _load_setup(vehicle_path, geometry_path):
    vehicle = cfg.load_vehicle(vehicle_path)
    geometry = cfg.load_geometry(geometry_path)
    return vehicle, geometry


def _trajectory_from_dict(data: dict) -> TrajectorySpec:
    kwargs = dict(data)
    if "waypoints" in kwargs and kwargs["waypoints"] is not None:
        kwargs["waypoints"] = np.asarray(kwargs["waypoints"], dtype=float)
    return TrajectorySpec(**kwargs)


def cmd_simulate(args) -> int:
    doc = yaml.safe_load(Path(args.config).read_text())
    vehicle, geometry = _load_setup(doc.get("vehicle"), doc.get("geometry"))
    sim = SimConfig(
        vehicle=vehicle,
        geometry=geometry,
        trajectory=_trajectory_from_dict(doc.get("trajectory", {"family": "lemniscate"})),
        model=doc.get("model", "bem"),
        residual_bundle=doc.get("residual_bundle"),
        gains=ControllerGains(**doc.get("gains", {})),
        dt=float(doc.get("dt", 1e-3)),
        duration=float(doc.get("duration", 4.0)),
        quat_update=doc.get("quat_update", "exp"),
    )
    try:
        result = track_and_simulate(sim)
    except SolverFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    out = doc.get("output", "sim_log.csv")
    result.log.to_csv(out)
    if doc.get("reference_output"):
        np.savetxt(
            doc["reference_output"],
            np.column_stack([result.log.t, result.reference_p]),
            delimiter=",", header="t,px,py,pz", comments="", fmt="%.18e",
        )
    rmse = closed_loop_rmse(result.log.p, result.reference_p) if len(result.log) else float("nan")
    print(f"model={sim.model} duration={sim.duration}s rmse={rmse:.4f} m crashed={result.crashed} log={out}")
    return EXIT_CRASH if result.crashed else EXIT_OK


def _parse_cells(spec: str) -> list[str]:
    if spec == "all":
        return list(MODEL_CELLS)
    cells = [c.strip() for c in spec.split(",") if c.strip()]
    for c in cells:
        if c not in MODEL_CELLS:
            raise SystemExit(f"unknown model cell {c!r}; choose from {MODEL_CELLS} or 'all'")
    return cells


def _residual_bundle(args):
    if getattr(args, "bundle", None):
        return load_bundle(args.bundle)
    # Zero-weight bundle: the +nn cells degenerate to their bare models
    # (plumbing smoke mode).
    return build_architecture("tcn-medium")


def _predict_log(cell: str, log: FlightLog, vehicle, geometry, coeffs, bundle):
    """Model wrench predictions over every usable sample of a log."""
    base, _, nn = cell.partition("+")
    n = len(log)
    start = int(decimation_offsets()[0]) if nn else 0
    idx = np.arange(start, n)
    f_pred = np.zeros((idx.size, 3))
    tau_pred = np.zeros((idx.size, 3))

    grid = build_quadrature(geometry)
    v_body = log.v_body()
    v_cache = [None, None, None, None]
    for row, k in enumerate(idx):
        state = QuadrotorState(log.p[k], log.q[k], log.v[k], log.omega[k])
        per_rotor_f = np.zeros(3)
        per_rotor_tau = np.zeros(3)
        if base != "none":
            for i in range(4):
                if base == "fit":
                    w = quadratic_rotor_wrench(max(log.rotor_speeds[k, i], 0.0), coeffs, vehicle.rotor_spin[i])
                else:
                    op = propeller_frame_inflow(state, i, vehicle, omega=max(log.rotor_speeds[k, i], 0.0))
                    w, sol, _, _ = bem_wrench_from_op(op, geometry, grid=grid, v_init=v_cache[i])
                    v_cache[i] = sol.v_i if sol.v_i > 0 else None
                r = vehicle.rotor_positions[i]
                per_rotor_f += w.f
                per_rotor_tau += w.tau + np.cross(r, w.f)
        f_pred[row] = per_rotor_f
        tau_pred[row] = per_rotor_tau
        if nn:
            rows = np.column_stack([v_body, log.omega, log.rotor_speeds])[: k + 1]
            res = predict_residual(bundle, history_from_dense(rows))
            f_pred[row] += res.f
            tau_pred[row] += res.tau
    return idx, f_pred, tau_pred


def cmd_evaluate(args) -> int:
    vehicle, geometry = _load_setup(args.vehicle, args.geometry)
    coeffs = identify_quadratic_from_bem(geometry, rho=vehicle.rho)
    bundle = _residual_bundle(args)
    cells = _parse_cells(args.model)

    log_dir = Path(args.log)
    paths = sorted(log_dir.glob("*.csv")) if log_dir.is_dir() else [log_dir]
    if not paths:
        raise SystemExit(f"no flight-log CSVs under {log_dir}")
    logs = [FlightLog.from_csv(p) for p in paths]

    rows = []
    for cell in cells:
        ef, et, labels_f, labels_t = [], [], [], []
        try:
            for log in logs:
                idx, f_pred, tau_pred = _predict_log(cell, log, vehicle, geometry, coeffs, bundle)
                ef.append(f_pred)
                et.append(tau_pred)
                labels_f.append(log.f[idx])
                labels_t.append(log.tau[idx])
        except SolverFailureError as exc:
            print(f"solver failure in cell {cell}: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        metrics = wrench_rmse_arrays(np.vstack(ef), np.vstack(et), np.vstack(labels_f), np.vstack(labels_t))
        rows.append([cell] + [metrics[k] for k in METRIC_KEYS])
        print(cell, " ".join(f"{k}={metrics[k]:.4f}" for k in METRIC_KEYS))

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model"] + list(METRIC_KEYS))
        writer.writerows(rows)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    vehicle, geometry = _load_setup(args.vehicle, args.geometry)
    coeffs = identify_quadratic_from_bem(geometry, rho=vehicle.rho)
    bundle = _residual_bundle(args)
    cells = _parse_cells(args.models)
    if args.trajectories == "all":
        sweep = DEFAULT_SWEEP
    else:
        wanted = [t.strip() for t in args.trajectories.split(",")]
        byname = dict(DEFAULT_SWEEP)
        sweep = [(n, byname[n]) for n in wanted]

    table = []
    for name, traj in sweep:
        row = {"trajectory": name}
        for cell in cells:
            base, _, nn = cell.partition("+")
            sim = SimConfig(
                vehicle=vehicle, geometry=geometry, trajectory=traj, model=base,
                residual_bundle=bundle if nn else None, coeffs=coeffs, duration=args.duration,
            )
            try:
                result = track_and_simulate(sim)
            except SolverFailureError as exc:
                print(f"solver failure in {name}/{cell}: {exc}", file=sys.stderr)
                return EXIT_SOLVER
            if result.crashed or len(result.log) == 0:
                row[cell] = "crash"
            else:
                row[cell] = f"{closed_loop_rmse(result.log.p, result.reference_p):.4f}"
                row.setdefault("v_mean", f"{result.log.mean_speed():.2f}")
                row.setdefault("v_max", f"{result.log.max_speed():.2f}")
        row.setdefault("v_mean", "")
        row.setdefault("v_max", "")
        table.append(row)
        print(name, {k: v for k, v in row.items() if k != "trajectory"})

    header = ["trajectory", "v_mean", "v_max"] + cells
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in table:
            writer.writerow([row.get(k, "") for k in header])
    print(f"wrote {args.out}")
    return EXIT_OK


def _parse_grid(spec: str) -> np.ndarray:
    lo, hi, n = spec.split(":")
    return np.linspace(float(lo), float(hi), int(n))


def cmd_charmap(args) -> int:
    geometry = cfg.load_geometry(args.geometry)
    grid = build_quadrature(geometry)
    omegas = _parse_grid(args.omega)
    v_hors = _parse_grid(args.vhor)
    v_vers = _parse_grid(args.vver)

    rows = []
    failures = 0
    for omega in omegas:
        for vh in v_hors:
            for vv in v_vers:
                op = RotorOperatingPoint(
                    omega=float(omega), v_hor=float(vh), v_ver=float(vv),
                    body_rates_p=np.zeros(2), rho=args.rho, spin=1.0,
                )
                try:
                    _, sol, angles, loads = bem_wrench_from_op(op, geometry, grid=grid)
                    rows.append([
                        omega, vh, vv, sol.v_i, sol.branch, loads.thrust, loads.h_force,
                        loads.torque, angles.a0, angles.a1, angles.b1, int(loads.reverse_flow),
                    ])
                except SolverFailureError:
                    failures += 1
                    rows.append([omega, vh, vv, "", "failed", "", "", "", "", "", "", ""])

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["omega_rad_s", "v_hor", "v_ver", "v_i", "branch", "thrust_N", "h_force_N",
             "torque_Nm", "a0_rad", "a1_rad", "b1_rad", "reverse_flow"]
        )
        writer.writerows(rows)
    total = len(rows)
    print(f"wrote {args.out}: {total} points, {failures} unsolvable")
    return EXIT_SOLVER if failures == total else EXIT_OK


def cmd_plot(args) -> int:
    log = FlightLog.from_csv(args.log)
    channels = [c.strip() for c in args.channels.split(",")]
    table = {name: col for name, col in zip(FLIGHTLOG_COLUMNS, np.column_stack(
        [log.t, log.p, log.q, log.v, log.omega, log.omega_dot, log.a_w, log.rotor_speeds, log.f, log.tau]
    ).T)}
    missing = [c for c in channels if c not in table]
    if missing:
        raise SystemExit(f"unknown channels {missing}; available: {FLIGHTLOG_COLUMNS}")
    sel = np.column_stack([table["t"]] + [table[c] for c in channels])[:: args.stride]
    np.savetxt(args.out, sel, delimiter=",", header=",".join(["t"] + channels), comments="", fmt="%.10e")
    print(f"wrote {args.out}: {sel.shape[0]} samples x {len(channels)} channels")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadbem", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="closed-loop simulation from a YAML config")
    p_sim.add_argument("--config", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("evaluate", help="wrench RMSE of model cells against logs")
    p_eval.add_argument("--model", default="all", help="cell name(s), e.g. bem+nn, or 'all'")
    p_eval.add_argument("--bundle", default=None, help="residual bundle file for +nn cells")
    p_eval.add_argument("--log", required=True, help="flight-log CSV or directory of CSVs")
    p_eval.add_argument("--out", required=True, help="output CSV path")
    p_eval.add_argument("--vehicle", default=None)
    p_eval.add_argument("--geometry", default=None)
    p_eval.set_defaults(func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="closed-loop RMSE table over trajectories x models")
    p_sweep.add_argument("--models", default="all")
    p_sweep.add_argument("--trajectories", default="all")
    p_sweep.add_argument("--bundle", default=None)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--duration", type=float, default=4.0)
    p_sweep.add_argument("--vehicle", default=None)
    p_sweep.add_argument("--geometry", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_map = sub.add_parser("charmap", help="BEM load map over an operating-point grid")
    p_map.add_argument("--geometry", default=None)
    p_map.add_argument("--out", required=True)
    p_map.add_argument("--omega", default="600:2800:12", help="grid as lo:hi:n")
    p_map.add_argument("--vhor", default="0:12:5")
    p_map.add_argument("--vver", default="-6:6:5", help="use --vver=-6:6:5 for negative bounds")
    p_map.add_argument("--rho", type=float, default=1.204)
    p_map.set_defaults(func=cmd_charmap)

    p_plot = sub.add_parser("plot", help="extract channel series from a log CSV")
    p_plot.add_argument("--log", required=True)
    p_plot.add_argument("--out", required=True)
    p_plot.add_argument("--channels", default="px,py,pz")
    p_plot.add_argument("--stride", type=int, default=1)
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
