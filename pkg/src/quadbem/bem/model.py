"""Blade-element-momentum rotor model.

The per-rotor wrench is produced in five steps:

1. assume zero coning/flapping;
2. find the induced velocity v_i at which momentum theory and the
   blade-element thrust integral agree (empirical quartic inside the
   vortex-ring regime);
3. solve the hinge moment balance for coning a0 and flapping a1, b1;
4. re-evaluate the thrust/in-plane/torque integrals with flapping;
5. assemble the propeller-frame wrench and rotate it to the body frame.

The blade disk shape behind the flapping terms is
beta(psi) = a0 - a1 cos(psi) + b1 sin(psi) with azimuth measured from the
tail in the direction of rotation, so b1 > 0 tilts the advancing side up.

``bem_wrench_from_op`` runs the whole chain inside one compiled kernel
call; the step-by-step functions in this module are the reference
implementations used for analysis and tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import QuadrotorState, VehicleParams, Wrench
from ..errors import DegenerateGeometryError, SolverFailureError
from . import kernels
from .geometry import PropellerGeometry, QuadratureGrid, build_quadrature
from .inflow import RotorOperatingPoint, propeller_frame_inflow

GRAVITY_MAGNITUDE = kernels.GRAVITY_MAGNITUDE
VRS_RATIO_MAX = kernels.VRS_RATIO_MAX


@dataclass(frozen=True)
class FlappingAngles:
    """Coning (a0) and first-harmonic flapping (a1 longitudinal, b1 lateral)."""

    a0: float
    a1: float
    b1: float

    def __post_init__(self):
        for name in ("a0", "a1", "b1"):
            val = getattr(self, name)
            if not np.isfinite(val) or abs(val) >= 0.35:
                raise ValueError(f"flapping angle {name}={val} outside sane range (|angle| < 0.35 rad)")

    @staticmethod
    def zero() -> "FlappingAngles":
        return FlappingAngles(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class BladeElementLoads:
    """Integrated rotor loads plus flapping-moment harmonics.

    ``reverse_flow`` flags operating points where the tangential velocity
    went non-positive somewhere on the quadrature grid; results there are
    outside the model's validity but still finite.
    """

    thrust: float
    h_force: float
    torque: float
    moment_mean: float
    moment_cos: float
    moment_sin: float
    reverse_flow: bool


@dataclass(frozen=True)
class InducedVelocityResult:
    """Induced velocity with solver metadata."""

    v_i: float
    branch: str  # "momentum" or "vortex-ring"
    thrust: float
    residual: float
    iterations: int
    v_hover_inflow: float | None = None  # v_h used by the vortex-ring fit

    def __float__(self) -> float:
        return self.v_i


def momentum_thrust(v_i: float, op: RotorOperatingPoint, disk_area: float) -> float:
    """Momentum-balance thrust of the rotor flow tube.

    T = 2 v_i rho A sqrt(v_hor^2 + (v_ver - v_i)^2).
    """
    if v_i < 0:
        raise ValueError(f"induced velocity must be non-negative, got {v_i}")
    return 2.0 * v_i * op.rho * disk_area * math.hypot(op.v_hor, op.v_ver - v_i)


def _tables(op: RotorOperatingPoint, grid: QuadratureGrid, geometry: PropellerGeometry,
            v_i: float, flapping: FlappingAngles) -> np.ndarray:
    return kernels.bem_tables(
        op.omega, op.v_hor, op.v_ver, v_i,
        flapping.a0, flapping.a1, flapping.b1,
        grid.r_nodes, grid.r_weights, grid.chord_nodes, grid.theta_nodes, grid.psi_nodes,
        geometry.hinge_offset, op.rho, float(geometry.blade_count), geometry.cl0, geometry.cd0,
    )


def blade_element_integrals(
    v_i: float,
    flapping: FlappingAngles,
    op: RotorOperatingPoint,
    geometry: PropellerGeometry,
    n_radial: int = 16,
    n_azimuth: int = 32,
    grid: QuadratureGrid | None = None,
) -> BladeElementLoads:
    """Numerically integrate thrust, in-plane force, and shaft torque.

    Evaluates the double integral over radius and azimuth of the lift and
    drag of each blade element, using the local inflow angle
    phi = atan2(U_P, U_T) and the full-range airfoil coefficients
    c_l = cl0 sin(a)cos(a), c_d = cd0 sin^2(a).
    """
    if v_i < 0:
        raise ValueError(f"induced velocity must be non-negative, got {v_i}")
    if grid is None:
        grid = build_quadrature(geometry, n_radial, n_azimuth)
    out = _tables(op, grid, geometry, v_i, flapping)
    return BladeElementLoads(
        thrust=out[kernels.THRUST],
        h_force=out[kernels.HFORCE],
        torque=out[kernels.TORQUE],
        moment_mean=out[kernels.M0],
        moment_cos=out[kernels.MC],
        moment_sin=out[kernels.MS],
        reverse_flow=bool(out[kernels.UT_MIN] <= 0.0),
    )


def _run_match(op: RotorOperatingPoint, geometry: PropellerGeometry, grid: QuadratureGrid,
               v_ver: float, v_init: float) -> tuple[float, float, float, int]:
    v_i, thrust, residual, iters, status = kernels._solve_match(
        op.omega, op.v_hor, v_ver,
        grid.r_nodes, grid.r_weights, grid.chord_nodes, grid.theta_nodes, grid.psi_nodes,
        geometry.hinge_offset, op.rho, float(geometry.blade_count), geometry.cl0, geometry.cd0,
        geometry.disk_area, v_init,
    )
    if status == kernels.STATUS_NO_THRUST:
        raise SolverFailureError(
            "blade elements produce no positive thrust at zero inflow; "
            "no non-negative induced velocity matches momentum theory",
            operating_point=op,
        )
    if status == kernels.STATUS_NO_BRACKET:
        raise SolverFailureError(
            f"no momentum/blade-element crossing for v_i in [0, {kernels.V_I_MAX}] m/s",
            operating_point=op,
        )
    return float(v_i), float(thrust), float(residual), int(iters)


def vortex_ring_induced_velocity(
    op: RotorOperatingPoint,
    geometry: PropellerGeometry,
    grid: QuadratureGrid | None = None,
    n_radial: int = 16,
    n_azimuth: int = 32,
) -> InducedVelocityResult:
    """Empirical induced velocity inside the vortex-ring regime.

    Solves the physical match with the descent rate forced to zero to get
    v_h, evaluates the quartic fit in x = v_Pz / v_h, and clamps at v_h so
    the hand-off back to momentum theory stays continuous.
    """
    if grid is None:
        grid = build_quadrature(geometry, n_radial, n_azimuth)
    v_h, thrust_h, residual, iters = _run_match(op, geometry, grid, v_ver=0.0, v_init=0.0)
    if v_h <= 0.0:
        raise SolverFailureError("level-flight induced velocity is zero; vortex-ring fit undefined", op)
    x = op.v_ver / v_h
    poly = 1.0 + x * (kernels.VRS_C1 + x * (kernels.VRS_C2 + x * (kernels.VRS_C3 + x * kernels.VRS_C4)))
    return InducedVelocityResult(
        v_i=max(v_h * poly, v_h),
        branch="vortex-ring",
        thrust=thrust_h,
        residual=residual,
        iterations=iters,
        v_hover_inflow=v_h,
    )


def solve_induced_velocity(
    op: RotorOperatingPoint,
    geometry: PropellerGeometry,
    n_radial: int = 16,
    n_azimuth: int = 32,
    grid: QuadratureGrid | None = None,
    v_init: float | None = None,
) -> InducedVelocityResult:
    """Induced velocity satisfying momentum and blade-element theory.

    Outside the vortex-ring regime the returned value makes both thrust
    expressions agree to max(1e-6 N, 1e-8 T) via bracketing bisection.
    Descending into the regime 0 < v_Pz / v_i < 2 switches to the
    empirical quartic fit.
    """
    if op.omega <= 0.0:
        raise ValueError("solve_induced_velocity requires a spinning rotor (omega > 0)")
    if grid is None:
        grid = build_quadrature(geometry, n_radial, n_azimuth)
    v_phys, thrust, residual, iters = _run_match(op, geometry, grid, v_ver=op.v_ver, v_init=v_init or 0.0)
    if op.v_ver > 0.0 and v_phys > 1e-12 and op.v_ver / v_phys < VRS_RATIO_MAX:
        return vortex_ring_induced_velocity(op, geometry, grid=grid)
    return InducedVelocityResult(
        v_i=v_phys, branch="momentum", thrust=thrust, residual=residual, iterations=iters
    )


def _structural_terms(op: RotorOperatingPoint, geometry: PropellerGeometry) -> tuple[float, float, float, float]:
    s_b = geometry.blade_static_moment()
    i_off = geometry.blade_inertia + geometry.hinge_offset * s_b
    omega2 = op.omega * op.omega
    k_cone = geometry.k_beta + omega2 * i_off
    k_flap = geometry.k_beta + omega2 * geometry.hinge_offset * s_b
    return s_b, i_off, k_cone, k_flap


def _flapping_residual(
    harmonics: np.ndarray,
    angles: np.ndarray,
    op: RotorOperatingPoint,
    geometry: PropellerGeometry,
) -> np.ndarray:
    """Hinge moment balance projected onto {1, cos, sin} azimuth harmonics.

    Aerodynamic harmonics come from the quadrature kernel; weight, spring,
    centrifugal, steady-flapping inertial, and gyroscopic moments use the
    rigid-blade-with-offset expressions.  The inertial and centrifugal
    harmonic terms cancel except for the hinge-offset part, leaving the
    spring plus offset stiffening on the cyclic equations.
    """
    s_b, i_off, k_cone, k_flap = _structural_terms(op, geometry)
    p_p, q_p = op.body_rates_p
    gyro = 2.0 * op.omega * i_off
    m0, mc, ms = harmonics
    a0, a1, b1 = angles
    return np.array(
        [
            m0 - k_cone * a0 - s_b * GRAVITY_MAGNITUDE,
            mc + k_flap * a1 - gyro * op.spin * p_p,
            ms - k_flap * b1 - gyro * q_p,
        ]
    )


def flapping_angles(
    v_i: float,
    op: RotorOperatingPoint,
    geometry: PropellerGeometry,
    n_radial: int = 16,
    n_azimuth: int = 32,
    grid: QuadratureGrid | None = None,
    fd_step: float = kernels.FLAP_FD_STEP,
) -> FlappingAngles:
    """Solve the linearized hinge moment balance for (a0, a1, b1).

    The aero-moment harmonics are linearized in the angles by central
    finite differences of the blade-element quadrature, then the 3x3
    system is solved in one step (angles are fractions of a degree, so
    one Newton step from zero is the small-angle solution).
    """
    if grid is None:
        grid = build_quadrature(geometry, n_radial, n_azimuth)

    def harmonics(angles: np.ndarray) -> np.ndarray:
        out = _tables(op, grid, geometry, v_i, FlappingAngles(*angles))
        return out[kernels.M0 : kernels.MS + 1]

    zero = np.zeros(3)
    f0 = _flapping_residual(harmonics(zero), zero, op, geometry)

    jac = np.empty((3, 3))
    for k in range(3):
        step = np.zeros(3)
        step[k] = fd_step
        h_plus = _flapping_residual(harmonics(step), step, op, geometry)
        h_minus = _flapping_residual(harmonics(-step), -step, op, geometry)
        jac[:, k] = (h_plus - h_minus) / (2.0 * fd_step)

    try:
        delta = np.linalg.solve(jac, -f0)
    except np.linalg.LinAlgError as exc:
        raise DegenerateGeometryError(f"singular flapping system for {geometry}: {exc}") from exc
    return FlappingAngles(a0=float(delta[0]), a1=float(delta[1]), b1=float(delta[2]))


def propeller_wrench(
    loads: BladeElementLoads, flapping: FlappingAngles, op: RotorOperatingPoint, geometry: PropellerGeometry
) -> Wrench:
    """Assemble the rotor wrench in the propeller frame and map it to the body.

    f_P = (-(H + sin(a1) T), s sin(b1) T, -T cos(a0)) and
    tau_P = (s k_beta b1, k_beta a1, -s Q) with s = +1 for a clockwise
    rotor; the frame rotation flips z so thrust acts along +z_B.
    """
    s = op.spin
    t, h, q = loads.thrust, loads.h_force, loads.torque
    f_p = np.array(
        [
            -(h + math.sin(flapping.a1) * t),
            s * math.sin(flapping.b1) * t,
            -t * math.cos(flapping.a0),
        ]
    )
    tau_p = np.array(
        [
            s * geometry.k_beta * flapping.b1,
            geometry.k_beta * flapping.a1,
            -s * q,
        ]
    )
    return Wrench(f=op.frame @ f_p, tau=op.frame @ tau_p)


def bem_wrench_from_op(
    op: RotorOperatingPoint,
    geometry: PropellerGeometry,
    n_radial: int = 16,
    n_azimuth: int = 32,
    grid: QuadratureGrid | None = None,
    v_init: float | None = None,
) -> tuple[Wrench, InducedVelocityResult, FlappingAngles, BladeElementLoads]:
    """Run the full five-step rotor algorithm for one operating point."""
    if grid is None:
        grid = build_quadrature(geometry, n_radial, n_azimuth)
    out = kernels.rotor_solve(
        op.omega, op.v_hor, op.v_ver, op.body_rates_p[0], op.body_rates_p[1], op.spin,
        grid.r_nodes, grid.r_weights, grid.chord_nodes, grid.theta_nodes, grid.psi_nodes,
        geometry.hinge_offset, op.rho, float(geometry.blade_count), geometry.cl0, geometry.cd0,
        geometry.k_beta, geometry.blade_static_moment(), geometry.blade_inertia,
        geometry.disk_area, v_init if v_init else 0.0,
    )
    status = out[kernels.RS_STATUS]
    if status in (kernels.STATUS_NO_THRUST, kernels.STATUS_NO_BRACKET):
        raise SolverFailureError(
            "no non-negative induced velocity matches momentum theory at this operating point",
            operating_point=op,
        )
    if status == kernels.STATUS_SINGULAR_FLAP:
        raise DegenerateGeometryError(f"singular flapping system for {geometry}")

    vrs = bool(out[kernels.RS_BRANCH])
    solution = InducedVelocityResult(
        v_i=float(out[kernels.RS_VI]),
        branch="vortex-ring" if vrs else "momentum",
        thrust=float(out[kernels.RS_T]),
        residual=float(out[kernels.RS_RESIDUAL]),
        iterations=int(out[kernels.RS_ITERS]),
        v_hover_inflow=float(out[kernels.RS_VH]) if vrs else None,
    )
    angles = FlappingAngles(float(out[kernels.RS_A0]), float(out[kernels.RS_A1]), float(out[kernels.RS_B1]))
    loads = BladeElementLoads(
        thrust=float(out[kernels.RS_T]),
        h_force=float(out[kernels.RS_H]),
        torque=float(out[kernels.RS_Q]),
        moment_mean=float(out[kernels.RS_M0]),
        moment_cos=float(out[kernels.RS_MC]),
        moment_sin=float(out[kernels.RS_MS]),
        reverse_flow=bool(out[kernels.RS_REVERSE]),
    )
    f_p = out[kernels.RS_FX : kernels.RS_FZ + 1]
    tau_p = out[kernels.RS_TX : kernels.RS_TZ + 1]
    wrench = Wrench(f=op.frame @ f_p, tau=op.frame @ tau_p)
    return wrench, solution, angles, loads


def bem_rotor_wrench(
    state: QuadrotorState,
    rotor_index: int,
    params: VehicleParams,
    geometry: PropellerGeometry,
    omega: float,
    n_radial: int = 16,
    n_azimuth: int = 32,
    grid: QuadratureGrid | None = None,
) -> Wrench:
    """Body-frame wrench of one rotor at the given state and rotor speed."""
    op = propeller_frame_inflow(state, rotor_index, params, omega=omega)
    wrench, _, _, _ = bem_wrench_from_op(op, geometry, n_radial, n_azimuth, grid=grid)
    return wrench
