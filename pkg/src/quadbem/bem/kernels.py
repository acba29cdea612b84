"""Blade-element quadrature kernels and the consolidated rotor solver.

One pass of the table kernel over the (radius x azimuth) grid produces
everything the rotor model needs: thrust T, in-plane force H, shaft
torque Q, the per-blade flapping aero-moment harmonics (mean, cos, sin),
and the minimum tangential velocity on the grid (reverse-flow
diagnostic).

The trigonometry is identity-based: with phi = atan2(U_P, U_T) the
integrand only needs sin(phi) = U_P/|U| and cos(phi) = U_T/|U|, and
alpha = theta + phi enters through angle-addition formulas, so each grid
element costs a single square root.

``rotor_solve`` chains the whole per-rotor algorithm (induced-velocity
bisection with vortex-ring handling, linearized flapping solve, final
load assembly) in one call so the simulation loop stays out of Python.

Everything is compiled with numba by default.  Setting the environment
variable ``QUADBEM_NO_NUMBA=1`` before import selects pure-numpy /
pure-Python implementations of the identical arithmetic; tests assert
the backends agree and ``benchmarks/bench_kernels.py`` times them.
"""

from __future__ import annotations

import math
import os

import numpy as np

# Output slots of the table kernel result vector.
THRUST, HFORCE, TORQUE, M0, MC, MS, UT_MIN = range(7)

# Output slots of the consolidated rotor solver.
(
    RS_FX, RS_FY, RS_FZ, RS_TX, RS_TY, RS_TZ,
    RS_VI, RS_BRANCH, RS_VH, RS_A0, RS_A1, RS_B1,
    RS_T, RS_H, RS_Q, RS_RESIDUAL, RS_ITERS, RS_REVERSE, RS_STATUS,
    RS_M0, RS_MC, RS_MS,
) = range(22)

STATUS_OK = 0.0
STATUS_NO_THRUST = 1.0
STATUS_NO_BRACKET = 2.0
STATUS_SINGULAR_FLAP = 3.0

V_I_MAX = 50.0
SOLVE_MAX_ITER = 60
FLAP_FD_STEP = 1e-3
GRAVITY_MAGNITUDE = 9.81

# Vortex-ring quartic (descent-ratio polynomial) and regime bound.
VRS_C1, VRS_C2, VRS_C3, VRS_C4 = 1.125, -1.372, 1.718, -0.655
VRS_RATIO_MAX = 2.0


def bem_tables_numpy(omega, v_hor, v_ver, v_i, a0, a1, b1, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0):
    """Vectorized evaluation of the blade-element tables (numpy backend)."""
    sin_psi = np.sin(psi)[None, :]
    cos_psi = np.cos(psi)[None, :]
    r_col = r[:, None]

    u_t = omega * r_col + v_hor * sin_psi
    u_p = (
        v_ver
        - v_i
        - r_col * omega * (a1 * sin_psi + b1 * cos_psi)
        + v_ver * (a0 - a1 * cos_psi - b1 * sin_psi) * cos_psi
    )
    u2 = u_t * u_t + u_p * u_p
    norm = np.sqrt(u2)
    safe = np.where(norm > 0.0, norm, 1.0)
    cos_phi = u_t / safe
    sin_phi = u_p / safe

    sin_th = np.sin(theta)[:, None]
    cos_th = np.cos(theta)[:, None]
    sin_a = sin_th * cos_phi + cos_th * sin_phi
    cos_a = cos_th * cos_phi - sin_th * sin_phi

    c_col = chord[:, None]
    lift = c_col * cl0 * sin_a * cos_a * u2
    drag = c_col * cd0 * sin_a * sin_a * u2
    normal = lift * cos_phi + drag * sin_phi
    inplane = -lift * sin_phi + drag * cos_phi

    n_psi = psi.size
    fac = n_blades * rho / (2.0 * n_psi)
    thrust = fac * float(w_r @ normal.sum(axis=1))
    h_force = fac * float((w_r @ (inplane * sin_psi)).sum())
    torque = fac * float((w_r * r) @ inplane.sum(axis=1))

    moment = 0.5 * rho * ((w_r * (r - hinge)) @ normal)
    m0 = float(moment.sum() / n_psi)
    mc = float(2.0 / n_psi * (moment @ np.cos(psi)))
    ms = float(2.0 / n_psi * (moment @ np.sin(psi)))

    return np.array([thrust, h_force, torque, m0, mc, ms, float(u_t.min())])


def _bem_tables_loops(omega, v_hor, v_ver, v_i, a0, a1, b1, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0):
    n_r = r.shape[0]
    n_psi = psi.shape[0]
    sin_th = np.empty(n_r)
    cos_th = np.empty(n_r)
    for i in range(n_r):
        sin_th[i] = math.sin(theta[i])
        cos_th[i] = math.cos(theta[i])
    thrust = 0.0
    h_force = 0.0
    torque = 0.0
    m0 = 0.0
    mc = 0.0
    ms = 0.0
    ut_min = np.inf
    for j in range(n_psi):
        sp = math.sin(psi[j])
        cp = math.cos(psi[j])
        flap_rate = a1 * sp + b1 * cp
        flap_tilt = (a0 - a1 * cp - b1 * sp) * cp
        moment_j = 0.0
        for i in range(n_r):
            ri = r[i]
            u_t = omega * ri + v_hor * sp
            u_p = v_ver - v_i - ri * omega * flap_rate + v_ver * flap_tilt
            if u_t < ut_min:
                ut_min = u_t
            u2 = u_t * u_t + u_p * u_p
            norm = math.sqrt(u2)
            if norm > 0.0:
                cos_phi = u_t / norm
                sin_phi = u_p / norm
            else:
                cos_phi = 1.0
                sin_phi = 0.0
            sin_a = sin_th[i] * cos_phi + cos_th[i] * sin_phi
            cos_a = cos_th[i] * cos_phi - sin_th[i] * sin_phi
            lift = chord[i] * cl0 * sin_a * cos_a * u2
            drag = chord[i] * cd0 * sin_a * sin_a * u2
            normal = lift * cos_phi + drag * sin_phi
            inplane = -lift * sin_phi + drag * cos_phi
            wi = w_r[i]
            thrust += wi * normal
            h_force += wi * inplane * sp
            torque += wi * inplane * ri
            moment_j += wi * (ri - hinge) * normal
        moment_j *= 0.5 * rho
        m0 += moment_j
        mc += moment_j * cp
        ms += moment_j * sp
    fac = n_blades * rho / (2.0 * n_psi)
    out = np.empty(7)
    out[0] = fac * thrust
    out[1] = fac * h_force
    out[2] = fac * torque
    out[3] = m0 / n_psi
    out[4] = 2.0 * mc / n_psi
    out[5] = 2.0 * ms / n_psi
    out[6] = ut_min
    return out


# _TABLES / _solve_match are rebound to their compiled versions below
# before anything calls them; njit resolves these globals lazily.
_TABLES = None
_solve_match = None


def _solve_match_impl(omega, v_hor, v_ver, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0, area, v_init):
    """Bisection on momentum-minus-blade-element thrust over v_i >= 0.

    Returns (v_i, thrust, |residual|, iterations, status).
    """
    t0 = _TABLES(omega, v_hor, v_ver, 0.0, 0.0, 0.0, 0.0, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)[0]
    g0 = -t0
    if g0 >= 0.0:
        if t0 <= 0.0:
            return 0.0, t0, 0.0, 0, STATUS_NO_THRUST
        return 0.0, t0, abs(g0), 0, STATUS_OK

    lo = 0.0
    grow = 0
    hi = -1.0
    if v_init > 0.0:
        # Warm start: try a narrow bracket around the previous solution
        # before falling back to geometric growth from zero.
        lo_w = 0.8 * v_init
        hi_w = 1.25 * v_init
        t_lo = _TABLES(omega, v_hor, v_ver, lo_w, 0.0, 0.0, 0.0, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)[0]
        g_lo = 2.0 * lo_w * rho * area * math.hypot(v_hor, v_ver - lo_w) - t_lo
        if g_lo < 0.0:
            t_hi = _TABLES(omega, v_hor, v_ver, hi_w, 0.0, 0.0, 0.0, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)[0]
            g_hi = 2.0 * hi_w * rho * area * math.hypot(v_hor, v_ver - hi_w) - t_hi
            if g_hi >= 0.0:
                lo = lo_w
                hi = hi_w
            grow += 2
        else:
            grow += 1
    if hi < 0.0:
        hi = math.sqrt(max(t0, 1e-9) / (2.0 * rho * area))
        t_hi = _TABLES(omega, v_hor, v_ver, hi, 0.0, 0.0, 0.0, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)[0]
        g_hi = 2.0 * hi * rho * area * math.hypot(v_hor, v_ver - hi) - t_hi
        while g_hi < 0.0:
            hi *= 2.0
            if hi > V_I_MAX:
                return 0.0, t0, abs(g_hi), grow, STATUS_NO_BRACKET
            t_hi = _TABLES(omega, v_hor, v_ver, hi, 0.0, 0.0, 0.0, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)[0]
            g_hi = 2.0 * hi * rho * area * math.hypot(v_hor, v_ver - hi) - t_hi
            grow += 1
    v_mid = hi
    t_mid = t0
    g_mid = g_hi
    iters = 0
    for _ in range(SOLVE_MAX_ITER):
        iters += 1
        v_mid = 0.5 * (lo + hi)
        t_mid = _TABLES(omega, v_hor, v_ver, v_mid, 0.0, 0.0, 0.0, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)[0]
        g_mid = 2.0 * v_mid * rho * area * math.hypot(v_hor, v_ver - v_mid) - t_mid
        # Thrust residual is the contract; the bracket-width condition
        # additionally pins v_i itself to ~1e-8 m/s.
        if abs(g_mid) <= max(1e-6, 1e-8 * abs(t_mid)) and (hi - lo) <= 1e-8 * max(1.0, v_mid):
            break
        if g_mid < 0.0:
            lo = v_mid
        else:
            hi = v_mid
    return v_mid, t_mid, abs(g_mid), grow + iters, STATUS_OK


def _rotor_solve_impl(omega, v_hor, v_ver, p_p, q_p, spin,
                      r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0,
                      k_beta, s_b, i_b, area, v_init):
    """Full rotor algorithm; returns the RS_* slot vector."""
    out = np.zeros(22)
    out[RS_VH] = np.nan
    residual = 0.0
    iters = 0.0

    # Induced velocity (skipped for a stopped rotor).
    v_i = 0.0
    if omega > 0.0:
        v_i, thrust, residual, it, status = _solve_match(
            omega, v_hor, v_ver, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0, area, v_init
        )
        iters = float(it)
        if status != STATUS_OK:
            out[RS_STATUS] = status
            return out
        if v_ver > 0.0 and v_i > 1e-12 and v_ver / v_i < VRS_RATIO_MAX:
            v_h, thrust_h, res_h, it2, status2 = _solve_match(
                omega, v_hor, 0.0, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0, area, 0.0
            )
            iters += float(it2)
            if status2 != STATUS_OK or v_h <= 0.0:
                out[RS_STATUS] = STATUS_NO_BRACKET if status2 == STATUS_OK else status2
                return out
            x = v_ver / v_h
            poly = 1.0 + x * (VRS_C1 + x * (VRS_C2 + x * (VRS_C3 + x * VRS_C4)))
            v_tilde = v_h * poly
            v_i = v_tilde if v_tilde > v_h else v_h
            residual = res_h
            out[RS_BRANCH] = 1.0
            out[RS_VH] = v_h

    # Flapping from the linearized hinge moment balance.
    i_off = i_b + hinge * s_b
    omega2 = omega * omega
    k_cone = k_beta + omega2 * i_off
    k_flap = k_beta + omega2 * hinge * s_b
    gyro = 2.0 * omega * i_off

    base = _TABLES(omega, v_hor, v_ver, v_i, 0.0, 0.0, 0.0, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)
    f0_0 = base[M0] - s_b * GRAVITY_MAGNITUDE
    f0_1 = base[MC] - gyro * spin * p_p
    f0_2 = base[MS] - gyro * q_p

    jac = np.empty((3, 3))
    h = FLAP_FD_STEP
    for k in range(3):
        da0 = h if k == 0 else 0.0
        da1 = h if k == 1 else 0.0
        db1 = h if k == 2 else 0.0
        plus = _TABLES(omega, v_hor, v_ver, v_i, da0, da1, db1, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)
        minus = _TABLES(omega, v_hor, v_ver, v_i, -da0, -da1, -db1, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)
        jac[0, k] = (plus[M0] - minus[M0]) / (2.0 * h)
        jac[1, k] = (plus[MC] - minus[MC]) / (2.0 * h)
        jac[2, k] = (plus[MS] - minus[MS]) / (2.0 * h)
    jac[0, 0] -= k_cone
    jac[1, 1] += k_flap
    jac[2, 2] -= k_flap

    det = (
        jac[0, 0] * (jac[1, 1] * jac[2, 2] - jac[1, 2] * jac[2, 1])
        - jac[0, 1] * (jac[1, 0] * jac[2, 2] - jac[1, 2] * jac[2, 0])
        + jac[0, 2] * (jac[1, 0] * jac[2, 1] - jac[1, 1] * jac[2, 0])
    )
    if abs(det) < 1e-30:
        out[RS_STATUS] = STATUS_SINGULAR_FLAP
        return out
    b0, b1r, b2 = -f0_0, -f0_1, -f0_2
    a0 = (
        b0 * (jac[1, 1] * jac[2, 2] - jac[1, 2] * jac[2, 1])
        - jac[0, 1] * (b1r * jac[2, 2] - jac[1, 2] * b2)
        + jac[0, 2] * (b1r * jac[2, 1] - jac[1, 1] * b2)
    ) / det
    a1 = (
        jac[0, 0] * (b1r * jac[2, 2] - jac[1, 2] * b2)
        - b0 * (jac[1, 0] * jac[2, 2] - jac[1, 2] * jac[2, 0])
        + jac[0, 2] * (jac[1, 0] * b2 - b1r * jac[2, 0])
    ) / det
    b1 = (
        jac[0, 0] * (jac[1, 1] * b2 - b1r * jac[2, 1])
        - jac[0, 1] * (jac[1, 0] * b2 - b1r * jac[2, 0])
        + b0 * (jac[1, 0] * jac[2, 1] - jac[1, 1] * jac[2, 0])
    ) / det

    # Final loads with flapping and the propeller-frame wrench.
    loads = _TABLES(omega, v_hor, v_ver, v_i, a0, a1, b1, r, w_r, chord, theta, psi, hinge, rho, n_blades, cl0, cd0)
    t_f = loads[THRUST]
    h_f = loads[HFORCE]
    q_f = loads[TORQUE]
    out[RS_FX] = -(h_f + math.sin(a1) * t_f)
    out[RS_FY] = spin * math.sin(b1) * t_f
    out[RS_FZ] = -t_f * math.cos(a0)
    out[RS_TX] = spin * k_beta * b1
    out[RS_TY] = k_beta * a1
    out[RS_TZ] = -spin * q_f
    out[RS_VI] = v_i
    out[RS_A0] = a0
    out[RS_A1] = a1
    out[RS_B1] = b1
    out[RS_T] = t_f
    out[RS_H] = h_f
    out[RS_Q] = q_f
    out[RS_RESIDUAL] = residual
    out[RS_ITERS] = iters
    out[RS_REVERSE] = 1.0 if loads[UT_MIN] <= 0.0 else 0.0
    out[RS_M0] = loads[M0]
    out[RS_MC] = loads[MC]
    out[RS_MS] = loads[MS]
    return out


_USE_NUMBA = os.environ.get("QUADBEM_NO_NUMBA", "0") not in ("1", "true", "yes")

if _USE_NUMBA:
    try:
        from numba import njit

        bem_tables_numba = njit(cache=True)(_bem_tables_loops)
        bem_tables = bem_tables_numba
        _TABLES = bem_tables_numba
        _solve_match = njit(cache=True)(_solve_match_impl)
        rotor_solve = njit(cache=True)(_rotor_solve_impl)
        ACTIVE_BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        bem_tables_numba = None
        bem_tables = bem_tables_numpy
        _TABLES = bem_tables_numpy
        _solve_match = _solve_match_impl
        rotor_solve = _rotor_solve_impl
        ACTIVE_BACKEND = "numpy"
else:
    bem_tables_numba = None
    bem_tables = bem_tables_numpy
    _TABLES = bem_tables_numpy
    _solve_match = _solve_match_impl
    rotor_solve = _rotor_solve_impl
    ACTIVE_BACKEND = "numpy"
