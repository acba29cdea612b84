"""Analytic reference trajectories for closed-loop evaluation.

Every family is parameterized by a phase theta = base_rate * speed_scale
* t, so doubling the speed scale doubles velocity magnitudes pointwise
along the curve.  Yaw is held constant (the references are designed for
minimal yaw rate).  Waypoint families (race-track, random-points) use a
closed Catmull-Rom spline: C^1 with acceleration jumps at the knots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("lemniscate", "ellipse", "slanted-circle", "linear-oscillation", "race-track", "random-points")


@dataclass(frozen=True)
class TrajectorySpec:
    """Geometric family plus scale parameters.

    ``speed_scale`` multiplies the base angular rate (and hence all
    velocities); ``size`` stretches the curve.  ``waypoints`` feeds the
    race-track family; ``n_points``/``seed`` generate the random-points
    family inside a box of half-extents ``size``.
    """

    family: str
    speed_scale: float = 1.0
    size: float = 3.0
    height: float = 1.5
    base_rate: float = 0.5  # rad/s at speed_scale = 1
    yaw: float = 0.0
    tilt: float = 0.45  # slanted-circle plane angle [rad]
    direction: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    waypoints: np.ndarray | None = None
    n_points: int = 6
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown trajectory family {self.family!r}; choose from {FAMILIES}")
        if self.speed_scale <= 0:
            raise ValueError("speed_scale must be positive")
        d = np.asarray(self.direction, dtype=float)
        object.__setattr__(self, "direction", d / np.linalg.norm(d))
        if self.waypoints is not None:
            w = np.asarray(self.waypoints, dtype=float)
            if w.ndim != 2 or w.shape[1] != 3 or w.shape[0] < 4:
                raise ValueError("waypoints must be (N>=4, 3)")
            object.__setattr__(self, "waypoints", w)


DEFAULT_RACETRACK = np.array(
    [
        [3.0, 0.0, 1.2],
        [2.0, 2.0, 1.8],
        [-2.0, 2.0, 1.2],
        [-3.0, 0.0, 1.8],
        [-2.0, -2.0, 1.2],
        [2.0, -2.0, 1.8],
    ]
)


def _waypoints_for(spec: TrajectorySpec) -> np.ndarray:
    if spec.family == "race-track":
        return spec.waypoints if spec.waypoints is not None else DEFAULT_RACETRACK * (spec.size / 3.0)
    rng = np.random.default_rng(spec.seed)
    pts = rng.uniform(-1.0, 1.0, (max(4, spec.n_points), 3)) * np.array([spec.size, spec.size, 0.4])
    pts[:, 2] += spec.height
    return pts


def _catmull_rom(points: np.ndarray, theta: np.ndarray):
    """Closed uniform Catmull-Rom position and phase derivatives."""
    n = points.shape[0]
    u = (theta / (2.0 * np.pi)) * n  # knot coordinate, period n
    seg = np.floor(u).astype(int) % n
    s = u - np.floor(u)
    p0 = points[(seg - 1) % n]
    p1 = points[seg]
    p2 = points[(seg + 1) % n]
    p3 = points[(seg + 2) % n]
    s = s[:, None]
    pos = 0.5 * (
        2 * p1
        + (-p0 + p2) * s
        + (2 * p0 - 5 * p1 + 4 * p2 - p3) * s**2
        + (-p0 + 3 * p1 - 3 * p2 + p3) * s**3
    )
    dpos_ds = 0.5 * ((-p0 + p2) + 2 * (2 * p0 - 5 * p1 + 4 * p2 - p3) * s + 3 * (-p0 + 3 * p1 - 3 * p2 + p3) * s**2)
    d2pos_ds2 = 0.5 * (2 * (2 * p0 - 5 * p1 + 4 * p2 - p3) + 6 * (-p0 + 3 * p1 - 3 * p2 + p3) * s)
    ds_dtheta = n / (2.0 * np.pi)
    return pos, dpos_ds * ds_dtheta, d2pos_ds2 * ds_dtheta**2


def generate_reference(spec: TrajectorySpec, t) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Reference position, velocity, acceleration, and yaw at time(s) t."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    rate = spec.base_rate * spec.speed_scale
    theta = rate * t
    a, z0 = spec.size, spec.height

    if spec.family == "lemniscate":
        # Gerono figure-eight.
        pos = np.stack([a * np.sin(theta), 0.5 * a * np.sin(2 * theta), np.full_like(theta, z0)], axis=1)
        dp = np.stack([a * np.cos(theta), a * np.cos(2 * theta), np.zeros_like(theta)], axis=1)
        d2p = np.stack([-a * np.sin(theta), -2 * a * np.sin(2 * theta), np.zeros_like(theta)], axis=1)
    elif spec.family == "ellipse":
        b = 0.6 * a
        pos = np.stack([a * np.cos(theta), b * np.sin(theta), np.full_like(theta, z0)], axis=1)
        dp = np.stack([-a * np.sin(theta), b * np.cos(theta), np.zeros_like(theta)], axis=1)
        d2p = np.stack([-a * np.cos(theta), -b * np.sin(theta), np.zeros_like(theta)], axis=1)
    elif spec.family == "slanted-circle":
        ct, st = np.cos(spec.tilt), np.sin(spec.tilt)
        pos = np.stack([a * np.cos(theta), a * np.sin(theta) * ct, z0 + a * np.sin(theta) * st], axis=1)
        dp = np.stack([-a * np.sin(theta), a * np.cos(theta) * ct, a * np.cos(theta) * st], axis=1)
        d2p = np.stack([-a * np.cos(theta), -a * np.sin(theta) * ct, -a * np.sin(theta) * st], axis=1)
    elif spec.family == "linear-oscillation":
        d = spec.direction
        base = np.array([0.0, 0.0, z0])
        pos = base + np.outer(a * np.sin(theta), d)
        dp = np.outer(a * np.cos(theta), d)
        d2p = np.outer(-a * np.sin(theta), d)
    else:  # race-track | random-points
        pos, dp, d2p = _catmull_rom(_waypoints_for(spec), theta)

    vel = dp * rate
    acc = d2p * rate**2
    if scalar:
        return pos[0], vel[0], acc[0], spec.yaw
    return pos, vel, acc, spec.yaw
