"""Flight-log containers and CSV I/O.

Raw inputs are two CSV streams per flight with separate clocks:

* pose:    t,px,py,pz,qw,qx,qy,qz                  (~400 Hz, mocap clock)
* onboard: t,gx,gy,gz,ax,ay,az,w1,w2,w3,w4          (~1 kHz, FC clock)

The fused :class:`FlightLog` is uniformly sampled and carries the full
dynamic state plus the measured body wrench.  Alternative column layouts
load through a mapping configuration ({canonical: actual} per stream).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

POSE_COLUMNS = ["t", "px", "py", "pz", "qw", "qx", "qy", "qz"]
ONBOARD_COLUMNS = ["t", "gx", "gy", "gz", "ax", "ay", "az", "w1", "w2", "w3", "w4"]
FLIGHTLOG_COLUMNS = (
    ["t", "px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz"]
    + ["dwx", "dwy", "dwz", "ax", "ay", "az", "w1", "w2", "w3", "w4"]
    + ["fx", "fy", "fz", "taux", "tauy", "tauz"]
)


@dataclass
class RawLog:
    """Asynchronous pose and onboard streams with their own clocks."""

    pose_t: np.ndarray
    pose_p: np.ndarray
    pose_q: np.ndarray
    onboard_t: np.ndarray
    gyro: np.ndarray
    accel: np.ndarray
    rotor_speeds: np.ndarray

    def __post_init__(self):
        for name in ("pose_t", "onboard_t"):
            t = getattr(self, name)
            if np.any(np.diff(t) <= 0):
                raise ValueError(f"{name} must be strictly increasing")


@dataclass
class FlightLog:
    """Uniformly sampled fused state with measured wrench labels.

    ``a_w`` is the world-frame linear acceleration (gravity included);
    ``f``/``tau`` are the body-frame propulsive+aerodynamic wrench
    obtained by inverting the rigid-body dynamics.
    """

    t: np.ndarray
    p: np.ndarray
    q: np.ndarray
    v: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    a_w: np.ndarray
    rotor_speeds: np.ndarray
    f: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        n = self.t.size
        shapes = {
            "p": (n, 3), "q": (n, 4), "v": (n, 3), "omega": (n, 3), "omega_dot": (n, 3),
            "a_w": (n, 3), "rotor_speeds": (n, 4), "f": (n, 3), "tau": (n, 3),
        }
        for name, shape in shapes.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def dt(self) -> float:
        return float(np.median(np.diff(self.t)))

    def mean_speed(self) -> float:
        return float(np.mean(np.linalg.norm(self.v, axis=1)))

    def max_speed(self) -> float:
        return float(np.max(np.linalg.norm(self.v, axis=1)))

    def v_body(self) -> np.ndarray:
        from .. import quaternion as quat

        return quat.rotate_inverse(self.q, self.v)

    def to_csv(self, path: str | Path) -> None:
        data = np.column_stack(
            [self.t, self.p, self.q, self.v, self.omega, self.omega_dot, self.a_w, self.rotor_speeds, self.f, self.tau]
        )
        np.savetxt(path, data, delimiter=",", header=",".join(FLIGHTLOG_COLUMNS), comments="", fmt="%.18e")

    @classmethod
    def from_csv(cls, path: str | Path) -> "FlightLog":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        if header != FLIGHTLOG_COLUMNS:
            raise ValueError(f"{path}: unexpected flight-log header")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(
            t=data[:, 0],
            p=data[:, 1:4],
            q=data[:, 4:8],
            v=data[:, 8:11],
            omega=data[:, 11:14],
            omega_dot=data[:, 14:17],
            a_w=data[:, 17:20],
            rotor_speeds=data[:, 20:24],
            f=data[:, 24:27],
            tau=data[:, 27:30],
        )


def _load_columns(path: str | Path, canonical: list[str], mapping: dict[str, str] | None) -> np.ndarray:
    with open(path) as fh:
        header = [h.strip() for h in fh.readline().strip().split(",")]
    names = [mapping.get(c, c) for c in canonical] if mapping else canonical
    try:
        idx = [header.index(n) for n in names]
    except ValueError as exc:
        raise ValueError(f"{path}: missing column ({exc}); header = {header}") from exc
    data = np.loadtxt(path, delimiter=",", skiprows=1, usecols=idx, ndmin=2)
    return data


def load_raw_log(pose_path: str | Path, onboard_path: str | Path,
                 column_mapping: dict[str, dict[str, str]] | None = None) -> RawLog:
    """Load a flight's pose and onboard CSVs.

    ``column_mapping`` adapts foreign headers, e.g.
    ``{"pose": {"t": "timestamp"}, "onboard": {"w1": "motor_0"}}``.
    """
    mapping = column_mapping or {}
    pose = _load_columns(pose_path, POSE_COLUMNS, mapping.get("pose"))
    onboard = _load_columns(onboard_path, ONBOARD_COLUMNS, mapping.get("onboard"))
    return RawLog(
        pose_t=pose[:, 0],
        pose_p=pose[:, 1:4],
        pose_q=pose[:, 4:8],
        onboard_t=onboard[:, 0],
        gyro=onboard[:, 1:4],
        accel=onboard[:, 4:7],
        rotor_speeds=onboard[:, 7:11],
    )
