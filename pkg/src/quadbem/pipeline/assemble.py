"""Flight-log assembly: fuse raw streams, invert dynamics, split datasets."""

from __future__ import annotations

import numpy as np

from .. import quaternion as quat
from ..core import VehicleParams
from .filtering import filter_motor_speeds
from .flightlog import FlightLog, RawLog
from .splines import QuaternionTrajectory, fit_splines
from .sync import SyncResult, sync_clocks

SPLIT_FRACTIONS = {"train": 0.7, "val": 0.2, "test": 0.1}


def measured_wrench(
    q: np.ndarray, omega: np.ndarray, omega_dot: np.ndarray, a_w: np.ndarray, params: VehicleParams
) -> tuple[np.ndarray, np.ndarray]:
    """Invert the rigid-body dynamics for the applied body wrench.

    f = m * q^-1 (a_w - g) and tau = J omega_dot + omega x J omega;
    exact inverse of the forward derivative.  Vectorized over leading axes.
    """
    f = params.mass * quat.rotate_inverse(q, a_w - params.gravity)
    J = params.inertia
    tau = J * omega_dot + np.cross(omega, J * omega)
    return f, tau


def assemble_flight_log(
    raw: RawLog,
    params: VehicleParams,
    motor_cutoff_hz: float | None = None,
    sync: SyncResult | None = None,
) -> FlightLog:
    """Fuse a raw log onto the onboard sample grid, in pose-clock time.

    Position channels and attitude are splined on the pose stream; clocks
    are aligned by gyro/spline-rate correlation (unless ``sync`` is
    given); motor speeds are low-pass filtered; the measured wrench comes
    from the inverted dynamics.  Output timestamps are pose-clock seconds
    on the (uniform) mapped onboard grid.
    """
    pos_spline = fit_splines(raw.pose_t, raw.pose_p)
    attitude = QuaternionTrajectory(raw.pose_t, raw.pose_q)
    if sync is None:
        sync = sync_clocks(attitude, raw.onboard_t, raw.gyro)

    t_mapped = sync.offset + sync.skew * raw.onboard_t
    inside = (t_mapped >= raw.pose_t[0]) & (t_mapped <= raw.pose_t[-1])
    if inside.sum() < 8:
        raise ValueError("no usable overlap between pose and onboard streams")
    t = t_mapped[inside]

    fs = 1.0 / (sync.skew * float(np.median(np.diff(raw.onboard_t))))
    speeds = filter_motor_speeds(raw.rotor_speeds, fs=fs, cutoff_hz=motor_cutoff_hz, tau_motor=params.tau_motor)[inside]
    speeds = np.maximum(speeds, 0.0)

    p = pos_spline.value(t)
    v = pos_spline.derivative(t)
    a_w = pos_spline.second_derivative(t)
    q = attitude.value(t)
    omega = attitude.body_rate(t)
    omega_dot = attitude.body_rate_derivative(t)
    f, tau = measured_wrench(q, omega, omega_dot, a_w, params)

    return FlightLog(
        t=t, p=p, q=q, v=v, omega=omega, omega_dot=omega_dot, a_w=a_w,
        rotor_speeds=speeds, f=f, tau=tau,
    )


def filter_logs_by_speed(logs: list[FlightLog], max_speed: float) -> list[FlightLog]:
    """Keep only trajectories whose peak speed stays at or below the bound.

    This is the reduced-dataset protocol used to probe generalization:
    identify on slow flights only (e.g. up to 5 m/s), evaluate on the
    full envelope.
    """
    if max_speed <= 0:
        raise ValueError("max_speed must be positive")
    return [log for log in logs if log.max_speed() <= max_speed]


def split_dataset(logs: list[FlightLog], fractions: dict[str, float] | None = None,
                  ) -> tuple[list[FlightLog], list[FlightLog], list[FlightLog]]:
    """Split whole trajectories into train/val/test, stratified by speed.

    Logs are walked in mean-speed order and greedily assigned to the
    subset with the largest count deficit, so every subset samples the
    whole speed range and the counts stay within one trajectory of the
    target fractions.
    """
    if not logs:
        raise ValueError("no flight logs to split")
    fractions = fractions or SPLIT_FRACTIONS
    names = list(fractions)
    targets = np.array([fractions[n] for n in names], dtype=float)
    targets = targets / targets.sum()

    order = np.argsort([log.mean_speed() for log in logs])
    counts = np.zeros(len(names))
    buckets: dict[str, list[FlightLog]] = {n: [] for n in names}
    for rank, idx in enumerate(order):
        deficit = targets * (rank + 1) - counts
        pick = int(np.argmax(deficit))
        buckets[names[pick]].append(logs[int(idx)])
        counts[pick] += 1
    return buckets.get("train", []), buckets.get("val", []), buckets.get("test", [])
