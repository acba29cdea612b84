"""Training examples from processed flight logs.

Each example pairs a 20x10 state/motor history window (2.5 ms spacing,
ending at the labelled sample) with the residual wrench label: the log's
measured force/torque minus the chosen rotor model's prediction.  The
windowing reuses the inference engine's decimation offsets so training
and simulation see bit-identical feature layouts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from quadbem.bem import bem_wrench_from_op, build_quadrature, propeller_frame_inflow
from quadbem.core import QuadrotorState
from quadbem.pipeline.flightlog import FlightLog
from quadbem.residual.history import decimation_offsets


@dataclass
class WindowDataset:
    """Stacked history windows and residual labels."""

    windows: np.ndarray  # (M, 20, 10) float32
    labels: np.ndarray  # (M, 6) float32

    def __len__(self) -> int:
        return self.windows.shape[0]

    def split(self, val_fraction: float = 0.2) -> tuple["WindowDataset", "WindowDataset"]:
        """Deterministic tail split: the last fraction becomes validation."""
        if not 0.0 < val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        n_val = max(1, int(round(len(self) * val_fraction)))
        n_train = len(self) - n_val
        if n_train < 1:
            raise ValueError("dataset too small to split")
        return (
            WindowDataset(self.windows[:n_train], self.labels[:n_train]),
            WindowDataset(self.windows[n_train:], self.labels[n_train:]),
        )

    @staticmethod
    def concatenate(parts: list["WindowDataset"]) -> "WindowDataset":
        return WindowDataset(
            np.concatenate([p.windows for p in parts]), np.concatenate([p.labels for p in parts])
        )


def rotor_model_wrench(log: FlightLog, vehicle, geometry, model: str = "fit", coeffs=None):
    """Per-sample body wrench of the chosen first-principles rotor model."""
    n = len(log)
    f = np.zeros((n, 3))
    tau = np.zeros((n, 3))
    if model == "none":
        return f, tau
    if model == "fit":
        if coeffs is None:
            raise ValueError("fit model needs quadratic coefficients")
        for i in range(4):
            w2 = np.maximum(log.rotor_speeds[:, i], 0.0) ** 2
            thrust = coeffs.c_lq * w2
            f[:, 2] += thrust
            tau[:, 2] += vehicle.rotor_spin[i] * coeffs.c_dq * w2
            r = vehicle.rotor_positions[i]
            # r x (0, 0, T) = (r_y T, -r_x T, 0)
            tau[:, 0] += r[1] * thrust
            tau[:, 1] += -r[0] * thrust
        return f, tau
    if model != "bem":
        raise ValueError(f"unknown rotor model {model!r}")
    grid = build_quadrature(geometry)
    v_cache = [None, None, None, None]
    for k in range(n):
        state = QuadrotorState(log.p[k], log.q[k], log.v[k], log.omega[k])
        for i in range(4):
            op = propeller_frame_inflow(state, i, vehicle, omega=max(log.rotor_speeds[k, i], 0.0))
            w, sol, _, _ = bem_wrench_from_op(op, geometry, grid=grid, v_init=v_cache[i])
            v_cache[i] = sol.v_i if sol.v_i > 0 else None
            r = vehicle.rotor_positions[i]
            f[k] += w.f
            tau[k] += w.tau + np.cross(r, w.f)
    return f, tau


def make_examples(log: FlightLog, f_model: np.ndarray, tau_model: np.ndarray) -> WindowDataset:
    """Window a log into (history, residual-label) pairs.

    Windows whose span contains a timing gap (sample spacing beyond 1.5x
    the nominal step) are skipped.
    """
    n = len(log)
    offsets = decimation_offsets()
    depth = int(offsets[0])
    if n <= depth:
        raise ValueError(f"log too short: {n} samples, need > {depth}")

    features = np.column_stack([log.v_body(), log.omega, log.rotor_speeds]).astype(np.float64)
    labels_all = np.column_stack([log.f - f_model, log.tau - tau_model])

    dt = np.diff(log.t)
    nominal = float(np.median(dt))
    gap_after = np.concatenate([[False], dt > 1.5 * nominal])  # gap between k-1 and k
    gap_cum = np.cumsum(gap_after)

    ends = np.arange(depth, n)
    # A window [k-depth, k] is clean when no gap boundary falls inside it.
    clean = (gap_cum[ends] - gap_cum[ends - depth]) == 0
    ends = ends[clean]

    idx = ends[:, None] - offsets[None, :]  # offsets are oldest-first
    windows = features[idx]
    return WindowDataset(windows.astype(np.float32), labels_all[ends].astype(np.float32))


def load_log_dir(path: str | Path) -> list[FlightLog]:
    paths = sorted(Path(path).glob("*.csv"))
    if not paths:
        raise FileNotFoundError(f"no flight-log CSVs under {path}")
    return [FlightLog.from_csv(p) for p in paths]
