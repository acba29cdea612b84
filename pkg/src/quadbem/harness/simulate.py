"""Closed-loop simulation: model matrix, tracking, flight-log capture."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..bem import bem_wrench_from_op, build_quadrature, propeller_frame_inflow
from ..bem.geometry import PropellerGeometry, QuadratureGrid
from ..core import (
    QuadrotorState,
    RotorSpeeds,
    VehicleParams,
    Wrench,
    aggregate_wrench,
    symplectic_euler_step,
)
from ..pipeline.flightlog import FlightLog
from ..residual import ResidualNetBundle, feature_row, history_from_dense, load_bundle, predict_residual
from ..residual.history import decimation_offsets
from ..rotor_quadratic import QuadraticCoeffs, fit_quadratic, quadratic_rotor_wrench
from .controller import CascadedController, ControllerGains
from .trajectories import TrajectorySpec, generate_reference

ROTOR_MODELS = ("none", "fit", "bem")
CRASH_POSITION_BOUND = 100.0


@dataclass
class SimConfig:
    """Everything one closed-loop run needs."""

    vehicle: VehicleParams
    geometry: PropellerGeometry
    trajectory: TrajectorySpec
    model: str = "bem"
    residual_bundle: ResidualNetBundle | str | Path | None = None
    coeffs: QuadraticCoeffs | None = None
    gains: ControllerGains = field(default_factory=ControllerGains)
    dt: float = 1e-3
    duration: float = 4.0
    n_radial: int = 16
    n_azimuth: int = 32
    quat_update: str = "exp"  # or "derivative": raw kinematic update
    initial_state: QuadrotorState | None = None  # default: at rest on the reference
    # Extra true-dynamics wrench (state, speeds) -> Wrench, e.g. an injected
    # residual the model does not know about; enters the logged totals.
    disturbance: object | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.model not in ROTOR_MODELS:
            raise ValueError(f"model must be one of {ROTOR_MODELS}, got {self.model!r}")
        if self.quat_update not in ("exp", "derivative"):
            raise ValueError(f"quat_update must be 'exp' or 'derivative', got {self.quat_update!r}")
        if isinstance(self.residual_bundle, (str, Path)):
            self.residual_bundle = load_bundle(self.residual_bundle)


@dataclass
class SimResult:
    log: FlightLog
    reference_p: np.ndarray
    crashed: bool
    crash_time: float | None = None

    @property
    def completed(self) -> bool:
        return not self.crashed


def identify_quadratic_from_bem(
    geometry: PropellerGeometry,
    rho: float = 1.204,
    omega_range: tuple[float, float] = (800.0, 2500.0),
    n_points: int = 12,
    n_radial: int = 16,
    n_azimuth: int = 32,
) -> QuadraticCoeffs:
    """Fit the quadratic coefficients to the BEM static thrust map."""
    from ..bem import FlappingAngles, blade_element_integrals, solve_induced_velocity
    from ..bem.inflow import RotorOperatingPoint

    grid = build_quadrature(geometry, n_radial, n_azimuth)
    rows = []
    for omega in np.linspace(*omega_range, n_points):
        op = RotorOperatingPoint(omega=float(omega), v_hor=0.0, v_ver=0.0, body_rates_p=np.zeros(2), rho=rho)
        sol = solve_induced_velocity(op, geometry, grid=grid)
        loads = blade_element_integrals(sol.v_i, FlappingAngles.zero(), op, geometry, grid=grid)
        rows.append((omega, loads.thrust, loads.torque))
    return fit_quadratic(np.asarray(rows))


class RotorModel:
    """Per-rotor wrench provider for the selected model cell.

    BEM keeps a per-rotor induced-velocity estimate as the warm start for
    the next step's bracketing solve.
    """

    def __init__(self, config: SimConfig):
        self.config = config
        self.params = config.vehicle
        self.kind = config.model
        if self.kind == "fit" and config.coeffs is None:
            raise ValueError("fit model requires quadratic coefficients")
        self.coeffs = config.coeffs
        self.grid: QuadratureGrid = build_quadrature(config.geometry, config.n_radial, config.n_azimuth)
        self._v_cache: list[float | None] = [None, None, None, None]

    def total_wrench(self, state: QuadrotorState, speeds: RotorSpeeds) -> Wrench:
        if self.kind == "none":
            return Wrench.zero()
        per_rotor = []
        for i in range(4):
            if self.kind == "fit":
                w = quadratic_rotor_wrench(speeds.omega[i], self.coeffs, self.params.rotor_spin[i])
            else:
                op = propeller_frame_inflow(state, i, self.params, omega=speeds.omega[i])
                w, sol, _, _ = bem_wrench_from_op(
                    op, self.config.geometry, grid=self.grid, v_init=self._v_cache[i]
                )
                self._v_cache[i] = sol.v_i if sol.v_i > 0 else None
            per_rotor.append((w, self.params.rotor_positions[i]))
        return aggregate_wrench(per_rotor)


def make_wrench_fn(rotor_model: RotorModel, bundle: ResidualNetBundle | None, initial_row: np.ndarray,
                   disturbance=None):
    """Total-wrench closure for the integrator, capturing its last output.

    The residual-network history is a dense per-step feature ring,
    pre-rolled with the initial state so inference is defined from the
    first step; the closure is called exactly once per integration step.
    """
    depth = int(decimation_offsets()[0]) + 1
    dense: deque = deque([initial_row] * depth, maxlen=depth)
    last: dict = {"wrench": Wrench.zero()}

    def wrench_fn(state: QuadrotorState, speeds: RotorSpeeds) -> Wrench:
        total = rotor_model.total_wrench(state, speeds)
        if bundle is not None:
            dense.append(feature_row(state.v_body(), state.omega_b, speeds.omega))
            total = total + predict_residual(bundle, history_from_dense(np.asarray(dense)))
        if disturbance is not None:
            total = total + disturbance(state, speeds)
        last["wrench"] = total
        return total

    return wrench_fn, last


def track_and_simulate(config: SimConfig) -> SimResult:
    """Fly the reference with the cascaded controller against the model.

    The controller always allocates through the quadratic model; the
    simulated dynamics use the configured rotor model plus the residual
    network when a bundle is set.  Log row k holds the state at t_k, the
    rotor speeds that produced the step's wrench, the wrench itself, and
    the step-consistent accelerations, so inverting the rigid-body
    dynamics on a log row reproduces the logged wrench exactly.
    Divergence beyond the position bound or a non-finite state stops the
    run and marks it crashed.
    """
    params = config.vehicle
    if config.coeffs is None:
        config.coeffs = identify_quadratic_from_bem(config.geometry, rho=params.rho)
    coeffs = config.coeffs
    controller = CascadedController(params, coeffs, config.gains)
    rotor_model = RotorModel(config)

    n_steps = int(round(config.duration / config.dt))
    if config.initial_state is not None:
        state = config.initial_state
    else:
        p0, _, _, _ = generate_reference(config.trajectory, 0.0)
        state = QuadrotorState(p0, np.array([1.0, 0.0, 0.0, 0.0]), np.zeros(3), np.zeros(3))
    hover_speed = float(np.sqrt(params.mass * 9.81 / (4.0 * coeffs.c_lq)))
    speeds = RotorSpeeds.constant(hover_speed)

    row0 = feature_row(state.v_body(), state.omega_b, speeds.omega)
    wrench_fn, last = make_wrench_fn(rotor_model, config.residual_bundle, row0, config.disturbance)

    cols = {
        name: np.empty((n_steps, dim))
        for name, dim in (
            ("p", 3), ("q", 4), ("v", 3), ("omega", 3), ("omega_dot", 3),
            ("a_w", 3), ("speeds", 4), ("f", 3), ("tau", 3), ("ref", 3),
        )
    }
    t_log = np.empty(n_steps)

    crashed = False
    crash_time = None
    steps_done = 0
    for k in range(n_steps):
        t = k * config.dt
        p_ref, v_ref, a_ref, yaw = generate_reference(config.trajectory, t)
        cmd = controller.rotor_commands(state, p_ref, v_ref, a_ref, yaw)
        prev = state
        try:
            # Divergence is an anticipated outcome here (handled below as a
            # crash), so numeric overflow is not worth a warning.
            with np.errstate(over="ignore", invalid="ignore"):
                state, speeds = symplectic_euler_step(
                    state, speeds, cmd, wrench_fn, params, config.dt, config.quat_update
                )
        except (ValueError, FloatingPointError):
            crashed, crash_time = True, t
            break

        t_log[k] = t
        cols["p"][k] = prev.p_wb
        cols["q"][k] = prev.q_wb
        cols["v"][k] = prev.v_wb
        cols["omega"][k] = prev.omega_b
        cols["speeds"][k] = speeds.omega
        cols["f"][k] = last["wrench"].f
        cols["tau"][k] = last["wrench"].tau
        cols["a_w"][k] = (state.v_wb - prev.v_wb) / config.dt
        cols["omega_dot"][k] = (state.omega_b - prev.omega_b) / config.dt
        cols["ref"][k] = p_ref
        steps_done = k + 1

        if not np.all(np.isfinite(state.p_wb)) or np.linalg.norm(state.p_wb) > CRASH_POSITION_BOUND:
            crashed, crash_time = True, t + config.dt
            break

    n = steps_done
    log = FlightLog(
        t=t_log[:n], p=cols["p"][:n], q=cols["q"][:n], v=cols["v"][:n], omega=cols["omega"][:n],
        omega_dot=cols["omega_dot"][:n], a_w=cols["a_w"][:n], rotor_speeds=cols["speeds"][:n],
        f=cols["f"][:n], tau=cols["tau"][:n],
    )
    return SimResult(log=log, reference_p=cols["ref"][:n], crashed=crashed, crash_time=crash_time)
