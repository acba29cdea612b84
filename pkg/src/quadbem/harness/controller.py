"""Cascaded tracking controller with quadratic-model control allocation.

Position/velocity PD -> desired acceleration -> desired attitude and
collective thrust (differentially flat construction) -> attitude P ->
body-rate P with gyroscopic feedforward -> per-rotor thrusts through the
inverted allocation matrix -> commanded rotor speeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import quaternion as quat
from ..core import QuadrotorState, RotorSpeeds, VehicleParams
from ..rotor_quadratic import QuadraticCoeffs


@dataclass(frozen=True)
class ControllerGains:
    kp_pos: float = 6.0
    kd_pos: float = 4.5
    kp_att: float = 9.0
    kp_rate: float = 14.0

    def scaled(self, factor: float) -> "ControllerGains":
        return ControllerGains(
            kp_pos=self.kp_pos * factor,
            kd_pos=self.kd_pos * factor,
            kp_att=self.kp_att * factor,
            kp_rate=self.kp_rate * factor,
        )


def allocation_matrix(params: VehicleParams, coeffs: QuadraticCoeffs) -> np.ndarray:
    """Map per-rotor thrusts to (collective, tau_x, tau_y, tau_z)."""
    k_yaw = coeffs.c_dq / coeffs.c_lq
    rows = [np.ones(4)]
    rows.append(params.rotor_positions[:, 1])  # tau_x = sum y_i T_i
    rows.append(-params.rotor_positions[:, 0])  # tau_y = -sum x_i T_i
    rows.append(params.rotor_spin * k_yaw)
    return np.vstack(rows)


class CascadedController:
    """Stateless cascade: each call maps (state, reference) to rotor commands."""

    def __init__(
        self,
        params: VehicleParams,
        coeffs: QuadraticCoeffs,
        gains: ControllerGains | None = None,
        max_rotor_speed: float = 3400.0,
    ):
        self.params = params
        self.coeffs = coeffs
        self.gains = gains or ControllerGains()
        self.max_rotor_speed = max_rotor_speed
        self._alloc_inv = np.linalg.inv(allocation_matrix(params, coeffs))

    def rotor_commands(self, state: QuadrotorState, p_ref, v_ref, a_ref, yaw_ref: float) -> RotorSpeeds:
        g = self.gains
        params = self.params

        a_des = a_ref + g.kp_pos * (p_ref - state.p_wb) + g.kd_pos * (v_ref - state.v_wb)
        f_des_w = params.mass * (a_des - params.gravity)

        # Desired attitude: z_B along the demanded force, yaw about it.
        norm = np.linalg.norm(f_des_w)
        z_des = f_des_w / norm if norm > 1e-9 else quat.rotate(state.q_wb, np.array([0.0, 0.0, 1.0]))
        x_c = np.array([np.cos(yaw_ref), np.sin(yaw_ref), 0.0])
        y_des = np.cross(z_des, x_c)
        y_norm = np.linalg.norm(y_des)
        if y_norm < 1e-6:  # force nearly horizontal: fall back to world y
            y_des = np.array([0.0, 1.0, 0.0])
            y_norm = 1.0
        y_des = y_des / y_norm
        x_des = np.cross(y_des, z_des)
        q_des = quat.from_rotation_matrix(np.column_stack([x_des, y_des, z_des]))

        # Collective thrust: demanded force projected on the current body z.
        z_body = quat.rotate(state.q_wb, np.array([0.0, 0.0, 1.0]))
        thrust = max(float(f_des_w @ z_body), 0.0)

        # Attitude P -> desired body rates (small-angle quaternion error).
        q_err = quat.multiply(quat.conjugate(state.q_wb), q_des)
        sign = 1.0 if q_err[0] >= 0.0 else -1.0
        omega_des = g.kp_att * 2.0 * sign * q_err[1:]

        # Body-rate P with gyroscopic feedforward.
        J = params.inertia
        tau_cmd = J * (g.kp_rate * (omega_des - state.omega_b)) + np.cross(state.omega_b, J * state.omega_b)

        thrusts = self._alloc_inv @ np.concatenate([[thrust], tau_cmd])
        thrusts = np.clip(thrusts, 0.0, self.coeffs.c_lq * self.max_rotor_speed**2)
        return RotorSpeeds(np.sqrt(thrusts / self.coeffs.c_lq))
