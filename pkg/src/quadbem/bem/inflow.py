"""Per-rotor operating point: hub inflow decomposed in the propeller frame.

The propeller frame P is attached to each rotor hub with z_P pointing
down (opposite body z) and x_P opposing the horizontal component of the
incoming wind, i.e. x_P points along the hub's horizontal velocity
through the air.  Blade azimuth is measured from the tail (the -x_P,
downwind side) in the direction of rotation, which makes the advancing
blade sit at 90 degrees for either spin direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import QuadrotorState, VehicleParams


@dataclass(frozen=True)
class RotorOperatingPoint:
    """Inflow state of a single rotor.

    ``v_hor`` is the horizontal airspeed of the hub (always >= 0 by frame
    construction) and ``v_ver`` the hub velocity along z_P (down), so a
    descending vehicle has positive v_ver.  ``body_rates_p`` holds the
    roll/pitch rates about (x_P, y_P) used by the gyroscopic flapping
    moment, ``frame`` the body-from-propeller rotation matrix, and
    ``spin`` +1 for a clockwise rotor seen from above.
    """

    omega: float
    v_hor: float
    v_ver: float
    body_rates_p: np.ndarray
    rho: float
    spin: float = 1.0
    frame: np.ndarray = field(default_factory=lambda: _default_frame())

    def __post_init__(self):
        if self.omega < 0:
            raise ValueError(f"rotor speed must be non-negative, got {self.omega}")
        if self.v_hor < 0:
            raise ValueError(f"v_hor must be non-negative, got {self.v_hor}")
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.spin not in (-1.0, 1.0):
            raise ValueError(f"spin must be +/-1, got {self.spin}")
        object.__setattr__(self, "body_rates_p", np.asarray(self.body_rates_p, dtype=float))
        object.__setattr__(self, "frame", np.asarray(self.frame, dtype=float))

    def replace_vertical(self, v_ver: float) -> "RotorOperatingPoint":
        return RotorOperatingPoint(
            omega=self.omega,
            v_hor=self.v_hor,
            v_ver=v_ver,
            body_rates_p=self.body_rates_p,
            rho=self.rho,
            spin=self.spin,
            frame=self.frame,
        )


def _default_frame() -> np.ndarray:
    # x_P = x_B, z_P = -z_B, y_P = z_P x x_P.
    return np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]])


def propeller_frame_from_axis(x_p_body: np.ndarray) -> np.ndarray:
    """Body-from-propeller rotation for a horizontal x_P direction."""
    c1, c2 = float(x_p_body[0]), float(x_p_body[1])
    # Columns are x_P, y_P = z_P x x_P, z_P = -z_B expressed in the body frame.
    return np.array([[c1, c2, 0.0], [c2, -c1, 0.0], [0.0, 0.0, -1.0]])


def propeller_frame_inflow(
    state: QuadrotorState,
    rotor_index: int,
    params: VehicleParams,
    omega: float = 0.0,
) -> RotorOperatingPoint:
    """Operating point of rotor ``rotor_index`` in still air.

    The hub moves at v_B + omega_B x r_P; with no wind the incoming air
    velocity is its negation.  The horizontal part fixes x_P, the vertical
    part maps to v_ver (positive when descending).
    """
    r_hub = params.rotor_positions[rotor_index]
    v_body = state.v_body()
    u = v_body + np.cross(state.omega_b, r_hub)

    v_hor = float(np.hypot(u[0], u[1]))
    if v_hor > 1e-12:
        x_p = np.array([u[0] / v_hor, u[1] / v_hor, 0.0])
    else:
        v_hor = 0.0
        x_p = np.array([1.0, 0.0, 0.0])
    frame = propeller_frame_from_axis(x_p)

    # Roll/pitch rates about x_P and y_P for the gyroscopic moment.
    p_p = float(state.omega_b @ frame[:, 0])
    q_p = float(state.omega_b @ frame[:, 1])

    return RotorOperatingPoint(
        omega=float(omega),
        v_hor=v_hor,
        v_ver=float(-u[2]),
        body_rates_p=np.array([p_p, q_p]),
        rho=params.rho,
        spin=float(params.rotor_spin[rotor_index]),
        frame=frame,
    )
