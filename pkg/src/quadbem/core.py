"""Rigid-body quadrotor dynamics, motor dynamics, and the simulation step.

Conventions
-----------
* World frame: z up, gravity ``(0, 0, -9.81)`` m/s^2 by default.
* Body frame: x forward, y left, z up; propeller thrust acts along +z_B.
* Attitude ``q_WB`` is a unit quaternion (w, x, y, z) rotating body vectors
  into the world frame.
* The 13-dimensional state is (p_WB, q_WB, v_WB, omega_B).

Every type is an immutable value object and every operation is a pure
function, so concurrent use is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import quaternion as quat

GRAVITY_DEFAULT = np.array([0.0, 0.0, -9.81])


def _as_vec(x, n, name) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite components: {v}")
    return v


@dataclass(frozen=True)
class QuadrotorState:
    """Rigid-body state: position, attitude, linear velocity, body rates."""

    p_wb: np.ndarray
    q_wb: np.ndarray
    v_wb: np.ndarray
    omega_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_wb", _as_vec(self.p_wb, 3, "p_wb"))
        object.__setattr__(self, "v_wb", _as_vec(self.v_wb, 3, "v_wb"))
        object.__setattr__(self, "omega_b", _as_vec(self.omega_b, 3, "omega_b"))
        q = _as_vec(self.q_wb, 4, "q_wb")
        n = np.linalg.norm(q)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"q_wb must be a unit quaternion, |q| = {n}")
        object.__setattr__(self, "q_wb", q)

    @staticmethod
    def hover(position=(0.0, 0.0, 0.0)) -> "QuadrotorState":
        return QuadrotorState(np.asarray(position, dtype=float), quat.IDENTITY.copy(), np.zeros(3), np.zeros(3))

    def v_body(self) -> np.ndarray:
        """Linear velocity expressed in the body frame."""
        return quat.rotate_inverse(self.q_wb, self.v_wb)


@dataclass(frozen=True)
class RotorSpeeds:
    """Angular rates of the four rotors [rad/s], each >= 0."""

    omega: np.ndarray

    def __post_init__(self):
        w = _as_vec(self.omega, 4, "omega")
        if np.any(w < 0.0):
            raise ValueError(f"rotor speeds must be non-negative, got {w}")
        object.__setattr__(self, "omega", w)

    @staticmethod
    def zero() -> "RotorSpeeds":
        return RotorSpeeds(np.zeros(4))

    @staticmethod
    def constant(value: float) -> "RotorSpeeds":
        return RotorSpeeds(np.full(4, float(value)))


@dataclass(frozen=True)
class Wrench:
    """Body-frame force [N] and torque [N*m] pair."""

    f: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _as_vec(self.f, 3, "f"))
        object.__setattr__(self, "tau", _as_vec(self.tau, 3, "tau"))

    @staticmethod
    def zero() -> "Wrench":
        return Wrench(np.zeros(3), np.zeros(3))

    def __add__(self, other: "Wrench") -> "Wrench":
        return Wrench(self.f + other.f, self.tau + other.tau)


@dataclass(frozen=True)
class VehicleParams:
    """Mass, inertia, rotor layout, and environment constants.

    The inertia matrix is diagonal.  ``rotor_spin`` holds one sign per
    rotor: +1 for clockwise rotation seen from above (looking down the
    -z_B axis), -1 for counter-clockwise; the four signs must cancel.
    """

    mass: float
    inertia: np.ndarray
    rotor_positions: np.ndarray
    rotor_spin: np.ndarray
    tau_motor: float = 0.033
    rho: float = 1.204
    gravity: np.ndarray = field(default_factory=lambda: GRAVITY_DEFAULT.copy())

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.tau_motor <= 0:
            raise ValueError(f"tau_motor must be positive, got {self.tau_motor}")
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        J = _as_vec(self.inertia, 3, "inertia")
        if np.any(J <= 0):
            raise ValueError(f"inertia diagonal must be positive, got {J}")
        object.__setattr__(self, "inertia", J)
        pos = np.asarray(self.rotor_positions, dtype=float)
        if pos.shape != (4, 3):
            raise ValueError(f"rotor_positions must have shape (4, 3), got {pos.shape}")
        object.__setattr__(self, "rotor_positions", pos)
        spin = np.asarray(self.rotor_spin, dtype=float)
        if spin.shape != (4,) or not np.all(np.isin(spin, (-1.0, 1.0))):
            raise ValueError(f"rotor_spin must be four entries of +/-1, got {spin}")
        if spin.sum() != 0.0:
            raise ValueError("rotor spin signs must sum to zero")
        object.__setattr__(self, "rotor_spin", spin)
        object.__setattr__(self, "gravity", _as_vec(self.gravity, 3, "gravity"))


@dataclass(frozen=True)
class StateDerivative:
    """Time derivative of :class:`QuadrotorState`."""

    p_dot: np.ndarray
    q_dot: np.ndarray
    v_dot: np.ndarray
    omega_dot: np.ndarray


def aggregate_wrench(per_rotor: Iterable[tuple[Wrench, Sequence[float]]]) -> Wrench:
    """Sum single-rotor wrenches into the total body wrench.

    f = sum f_i and tau = sum (tau_i + r_i x f_i), with r_i the rotor hub
    position in the body frame.  A quadrotor passes exactly four entries.
    """
    f_total = np.zeros(3)
    tau_total = np.zeros(3)
    count = 0
    for wrench, r in per_rotor:
        r = _as_vec(r, 3, "rotor position")
        f_total += wrench.f
        tau_total += wrench.tau + np.cross(r, wrench.f)
        count += 1
    if count == 0:
        raise ValueError("aggregate_wrench needs at least one rotor entry")
    return Wrench(f_total, tau_total)


def rigid_body_derivative(state: QuadrotorState, total: Wrench, params: VehicleParams) -> StateDerivative:
    """Newton-Euler derivative of the 13-dimensional state.

    p_dot = v,  q_dot = 0.5 q (0, omega),
    v_dot = (q * f) / m + g,  omega_dot = J^-1 (tau - omega x J omega).
    """
    J = params.inertia
    omega = state.omega_b
    v_dot = quat.rotate(state.q_wb, total.f) / params.mass + params.gravity
    omega_dot = (total.tau - np.cross(omega, J * omega)) / J
    return StateDerivative(
        p_dot=state.v_wb.copy(),
        q_dot=quat.derivative(state.q_wb, omega),
        v_dot=v_dot,
        omega_dot=omega_dot,
    )


def motor_step(omega: RotorSpeeds, omega_cmd: RotorSpeeds, dt: float, tau: float) -> RotorSpeeds:
    """Exact discretization of the first-order motor lag over one step.

    d(Omega)/dt = (Omega_cmd - Omega)/tau integrates to
    Omega' = Omega_cmd + (Omega - Omega_cmd) exp(-dt/tau); the result is
    clamped at zero since rotors cannot reverse.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    decay = math.exp(-dt / tau)
    new = omega_cmd.omega + (omega.omega - omega_cmd.omega) * decay
    return RotorSpeeds(np.maximum(new, 0.0))


WrenchFn = Callable[[QuadrotorState, RotorSpeeds], Wrench]


def symplectic_euler_step(
    state: QuadrotorState,
    rotor_speeds: RotorSpeeds,
    omega_cmd: RotorSpeeds,
    wrench_fn: WrenchFn,
    params: VehicleParams,
    dt: float = 1e-3,
    quat_update: str = "exp",
) -> tuple[QuadrotorState, RotorSpeeds]:
    """Advance state and rotor speeds by one semi-implicit Euler step.

    Update order: (1) motor lag, (2) total wrench at the current state with
    the new rotor speeds, (3) velocities, (4) position and attitude from
    the *new* velocities.  Updating velocities before positions is what
    gives the scheme its energy behaviour on rigid-body motion.

    ``quat_update`` selects the attitude integration: ``"exp"`` composes
    the exponential map of omega*dt (exact for constant omega), while
    ``"derivative"`` applies the raw kinematic derivative and renormalizes.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if quat_update not in ("exp", "derivative"):
        raise ValueError(f"unknown quat_update {quat_update!r}")

    speeds_new = motor_step(rotor_speeds, omega_cmd, dt, params.tau_motor)
    total = wrench_fn(state, speeds_new)
    deriv = rigid_body_derivative(state, total, params)

    v_new = state.v_wb + deriv.v_dot * dt
    omega_new = state.omega_b + deriv.omega_dot * dt
    p_new = state.p_wb + v_new * dt

    if quat_update == "exp":
        q_new = quat.multiply(state.q_wb, quat.exp_map(omega_new * dt))
    else:
        q_new = state.q_wb + quat.derivative(state.q_wb, omega_new) * dt
    q_new = quat.normalize(q_new)

    return QuadrotorState(p_new, q_new, v_new, omega_new), speeds_new


def hover_rotor_speed(params: VehicleParams, thrust_coeff: float) -> float:
    """Rotor speed at which four identical rotors balance gravity."""
    return math.sqrt(params.mass * np.linalg.norm(params.gravity) / (4.0 * thrust_coeff))
