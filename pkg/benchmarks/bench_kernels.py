"""Benchmark the numba kernels against the pure-numpy fallback.

Runs three workloads on whichever backend is active, then (when launched
without arguments) re-executes itself with QUADBEM_NO_NUMBA=1 to collect
the fallback numbers and prints a comparison table.  Also cross-checks
that both backends agree numerically.

Usage:  python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

import numpy as np


def run_workloads() -> dict:
    from quadbem import config
    from quadbem.bem import RotorOperatingPoint, build_quadrature, solve_induced_velocity
    from quadbem.bem import kernels
    from quadbem.harness import SimConfig, TrajectorySpec, identify_quadratic_from_bem, track_and_simulate

    vehicle = config.load_vehicle()
    geometry = config.load_geometry()
    grid = build_quadrature(geometry)

    op = RotorOperatingPoint(
        omega=1500.0, v_hor=6.0, v_ver=-1.0, body_rates_p=np.array([0.2, -0.1]), rho=vehicle.rho, spin=1.0
    )
    args = (
        op.omega, op.v_hor, op.v_ver, 6.0, 0.002, 0.001, -0.001,
        grid.r_nodes, grid.r_weights, grid.chord_nodes, grid.theta_nodes, grid.psi_nodes,
        geometry.hinge_offset, op.rho, float(geometry.blade_count), geometry.cl0, geometry.cd0,
    )
    kernels.bem_tables(*args)  # warm-up / JIT compile
    n = 20_000
    t0 = time.perf_counter()
    for _ in range(n):
        kernels.bem_tables(*args)
    t_tables = (time.perf_counter() - t0) / n

    rng = np.random.default_rng(0)
    ops = [
        RotorOperatingPoint(
            omega=float(rng.uniform(700, 2600)), v_hor=float(rng.uniform(0, 10)),
            v_ver=float(rng.uniform(-4, 2)), body_rates_p=np.zeros(2), rho=vehicle.rho, spin=1.0,
        )
        for _ in range(200)
    ]
    solve_induced_velocity(ops[0], geometry, grid=grid)
    t0 = time.perf_counter()
    for o in ops:
        solve_induced_velocity(o, geometry, grid=grid)
    t_solve = (time.perf_counter() - t0) / len(ops)

    sim = SimConfig(
        vehicle=vehicle, geometry=geometry,
        trajectory=TrajectorySpec(family="lemniscate", speed_scale=1.0),
        model="bem", coeffs=identify_quadratic_from_bem(geometry, rho=vehicle.rho), duration=0.5,
    )
    t0 = time.perf_counter()
    track_and_simulate(sim)
    t_sim = time.perf_counter() - t0

    sample = kernels.bem_tables(*args)
    return {
        "backend": kernels.ACTIVE_BACKEND,
        "tables_us": t_tables * 1e6,
        "solve_ms": t_solve * 1e3,
        "sim_halfsec_s": t_sim,
        "sample": list(map(float, sample)),
    }


def main() -> None:
    if "--worker" in sys.argv:
        print(json.dumps(run_workloads()))
        return

    here = run_workloads()
    env = dict(os.environ, QUADBEM_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker"],
        env=env, capture_output=True, text=True, check=True,
    )
    other = json.loads(out.stdout.strip().splitlines()[-1])

    a, b = np.array(here["sample"]), np.array(other["sample"])
    agree = np.allclose(a, b, rtol=1e-10, atol=1e-12)

    print(f"\n{'workload':<28}{here['backend']:>12}{other['backend']:>12}{'speedup':>10}")
    rows = [
        ("blade-element tables [us]", here["tables_us"], other["tables_us"]),
        ("induced-velocity solve [ms]", here["solve_ms"], other["solve_ms"]),
        ("0.5 s closed-loop BEM [s]", here["sim_halfsec_s"], other["sim_halfsec_s"]),
    ]
    for name, x, y in rows:
        print(f"{name:<28}{x:>12.3f}{y:>12.3f}{y / x:>9.1f}x")
    print(f"\nbackends agree on kernel output: {agree}")
    if not agree:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
