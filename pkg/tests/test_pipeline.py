import numpy as np
import pytest

from quadbem import quaternion as quat
from quadbem.core import QuadrotorState, VehicleParams, Wrench, rigid_body_derivative
from quadbem.errors import SyncFailureError
from quadbem.pipeline import (
    FlightLog,
    QuaternionTrajectory,
    RawLog,
    assemble_flight_log,
    filter_motor_speeds,
    fit_scalar_spline,
    fit_splines,
    load_raw_log,
    measured_wrench,
    motor_cutoff_hz,
    split_dataset,
    sync_clocks,
)


def integrate_attitude(t: np.ndarray, omega_fn):
    """Ground-truth attitude from fine exp-map integration of omega(t)."""
    fine = 10  # substeps per sample interval
    q = quat.IDENTITY.copy()
    out = np.empty((t.size, 4))
    out[0] = q
    for i in range(1, t.size):
        h = (t[i] - t[i - 1]) / fine
        for k in range(fine):
            tm = t[i - 1] + (k + 0.5) * h
            q = quat.multiply(q, quat.exp_map(omega_fn(tm) * h))
        q = quat.normalize(q)
        out[i] = q
    return out


def smooth_omega(t):
    t = np.atleast_1d(t)
    w = np.stack(
        [
            1.2 * np.sin(2 * np.pi * 0.9 * t) + 0.4 * np.sin(2 * np.pi * 2.3 * t + 1.0),
            0.8 * np.cos(2 * np.pi * 1.4 * t),
            0.5 * np.sin(2 * np.pi * 0.5 * t + 0.3),
        ],
        axis=-1,
    )
    return w[0] if np.isscalar(t) or np.asarray(t).ndim == 0 else w


class TestScalarSplines:
    def test_cubic_polynomial_exact(self):
        t = np.linspace(0, 2, 400)
        y = 0.3 * t**3 - 1.2 * t**2 + 0.5 * t - 2.0
        sp = fit_scalar_spline(t, y)
        tq = np.linspace(0.05, 1.95, 77)
        assert np.allclose(sp.value(tq), 0.3 * tq**3 - 1.2 * tq**2 + 0.5 * tq - 2.0, atol=1e-12)
        assert np.allclose(sp.derivative(tq), 0.9 * tq**2 - 2.4 * tq + 0.5, atol=1e-10)
        assert np.allclose(sp.second_derivative(tq), 1.8 * tq - 2.4, atol=1e-8)

    def test_sine_derivatives_at_400hz(self):
        t = np.arange(0, 2.0, 1.0 / 400.0)
        y = np.sin(2 * np.pi * t)
        sp = fit_scalar_spline(t, y)
        tq = t[20:-20]
        v_true = 2 * np.pi * np.cos(2 * np.pi * tq)
        a_true = -((2 * np.pi) ** 2) * np.sin(2 * np.pi * tq)
        assert np.max(np.abs(sp.derivative(tq) - v_true)) / np.max(np.abs(v_true)) < 1e-3
        assert np.max(np.abs(sp.second_derivative(tq) - a_true)) / np.max(np.abs(a_true)) < 1e-3

    def test_constant_stream_zero_derivatives(self):
        t = np.linspace(0, 1, 50)
        sp = fit_scalar_spline(t, np.full_like(t, 3.7))
        assert np.allclose(sp.derivative(t), 0.0, atol=1e-12)
        assert np.allclose(sp.second_derivative(t), 0.0, atol=1e-10)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_scalar_spline(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 2.0]))

    def test_noisy_data_is_smoothed(self):
        rng = np.random.default_rng(0)
        t = np.arange(0, 4.0, 1.0 / 400.0)
        clean = np.sin(2 * np.pi * 0.8 * t)
        noisy = clean + rng.normal(0, 0.003, t.size)
        sp = fit_scalar_spline(t, noisy)
        v_true = 2 * np.pi * 0.8 * np.cos(2 * np.pi * 0.8 * t)
        err = sp.derivative(t[50:-50]) - v_true[50:-50]
        # Naive finite differences would see noise amplified by fs/2 ~ 2.4 rad/s.
        assert np.sqrt(np.mean(err**2)) < 0.2


class TestQuaternionTrajectory:
    def test_body_rates_match_ground_truth(self):
        t = np.arange(0, 3.0, 1.0 / 400.0)
        q = integrate_attitude(t, smooth_omega)
        traj = QuaternionTrajectory(t, q)
        tq = t[30:-30]
        rates = traj.body_rate(tq)
        truth = smooth_omega(tq)
        assert np.max(np.linalg.norm(rates - truth, axis=1)) < 2e-3

    def test_angular_acceleration_matches_finite_difference_truth(self):
        t = np.arange(0, 3.0, 1.0 / 400.0)
        q = integrate_attitude(t, smooth_omega)
        traj = QuaternionTrajectory(t, q)
        tq = t[40:-40]
        h = 1e-5
        truth = (smooth_omega(tq + h) - smooth_omega(tq - h)) / (2 * h)
        acc = traj.body_rate_derivative(tq)
        assert np.max(np.linalg.norm(acc - truth, axis=1)) < 0.1

    def test_values_stay_unit_norm(self):
        t = np.arange(0, 1.0, 1.0 / 400.0)
        q = integrate_attitude(t, smooth_omega)
        traj = QuaternionTrajectory(t, q)
        values = traj.value(np.linspace(0.1, 0.9, 333))
        assert np.allclose(np.linalg.norm(values, axis=1), 1.0, atol=1e-12)

    def test_hemisphere_flips_handled(self):
        t = np.arange(0, 2.0, 1.0 / 400.0)
        q = integrate_attitude(t, smooth_omega)
        q_flipped = q.copy()
        q_flipped[::7] *= -1.0
        a = QuaternionTrajectory(t, q).body_rate(t[50:-50])
        b = QuaternionTrajectory(t, q_flipped).body_rate(t[50:-50])
        assert np.allclose(a, b, atol=1e-12)


class TestSync:
    @staticmethod
    def _make_streams(offset=0.0, skew=1.0, duration=6.0, noise=0.0, seed=0):
        t_pose = np.arange(0, duration, 1.0 / 400.0)
        q = integrate_attitude(t_pose, smooth_omega)
        attitude = QuaternionTrajectory(t_pose, q)
        # Onboard clock: t_pose = offset + skew * t_onboard over the overlap.
        t_on = (np.arange(0.2, duration - 0.2, 1.0 / 1000.0) - offset) / skew
        gyro = smooth_omega(offset + skew * t_on)
        if noise:
            gyro = gyro + np.random.default_rng(seed).normal(0, noise, gyro.shape)
        return attitude, t_on, gyro

    def test_self_sync_identity(self):
        attitude, t_on, gyro = self._make_streams()
        res = sync_clocks(attitude, t_on, gyro)
        assert abs(res.offset) < 1e-3
        assert abs(res.skew - 1.0) < 1e-3
        assert res.correlation > 0.999

    def test_injected_offset_and_skew_recovered(self):
        # 2.4% skew is the magnitude reported for real hardware clocks.
        attitude, t_on, gyro = self._make_streams(offset=0.137, skew=1.024, noise=0.002)
        res = sync_clocks(attitude, t_on, gyro)
        assert abs(res.offset - 0.137) < 1e-3
        assert abs(res.skew - 1.024) < 1e-3

    def test_white_noise_fails(self):
        attitude, t_on, _ = self._make_streams()
        rng = np.random.default_rng(1)
        with pytest.raises(SyncFailureError):
            sync_clocks(attitude, t_on, rng.normal(0, 1.0, (t_on.size, 3)))

    def test_shift_equivariance(self):
        attitude, t_on, gyro = self._make_streams()
        base = sync_clocks(attitude, t_on, gyro)
        delta = 0.25
        shifted = sync_clocks(attitude, t_on - delta, gyro)
        assert abs((shifted.offset - base.offset) - delta * base.skew) < 2e-3


class TestButterworth:
    FS = 1000.0

    def test_dc_passes_unchanged(self):
        x = np.full(4000, 5.5)
        y = filter_motor_speeds(x, fs=self.FS)
        assert np.max(np.abs(y - 5.5)) < 1e-9

    def test_minus_3db_at_cutoff(self):
        cutoff = motor_cutoff_hz(0.033)
        t = np.arange(0, 40.0, 1.0 / self.FS)
        x = np.sin(2 * np.pi * cutoff * t)
        y = filter_motor_speeds(x, fs=self.FS)
        mid = slice(4000, -4000)
        ratio = np.sqrt(np.mean(y[mid] ** 2) / np.mean(x[mid] ** 2))
        db = 20 * np.log10(ratio)
        assert abs(db - (-3.0103)) < 0.2

    def test_decade_above_cutoff_strongly_attenuated(self):
        cutoff = motor_cutoff_hz(0.033)
        t = np.arange(0, 20.0, 1.0 / self.FS)
        x = np.sin(2 * np.pi * 10 * cutoff * t)
        y = filter_motor_speeds(x, fs=self.FS)
        mid = slice(2000, -2000)
        db = 20 * np.log10(np.sqrt(np.mean(y[mid] ** 2) / np.mean(x[mid] ** 2)))
        assert db < -60.0

    def test_cutoff_above_nyquist_rejected(self):
        with pytest.raises(ValueError):
            filter_motor_speeds(np.zeros(100), fs=100.0, cutoff_hz=60.0)


class TestWrenchInversion:
    def test_exact_inverse_of_derivative(self, vehicle):
        rng = np.random.default_rng(2)
        n = 2000
        q = quat.random_unit(rng, n)
        omega = rng.uniform(-20, 20, (n, 3))
        f_true = rng.uniform(-30, 30, (n, 3))
        tau_true = rng.uniform(-1, 1, (n, 3))
        # Forward: acceleration produced by the wrench; inverse must recover it.
        a_w = quat.rotate(q, f_true) / vehicle.mass + vehicle.gravity
        J = vehicle.inertia
        omega_dot = (tau_true - np.cross(omega, J * omega)) / J
        f_rec, tau_rec = measured_wrench(q, omega, omega_dot, a_w, vehicle)
        assert np.max(np.abs(f_rec - f_true)) < 1e-9
        assert np.max(np.abs(tau_rec - tau_true)) < 1e-9

    def test_matches_scalar_rigid_body_derivative(self, vehicle):
        rng = np.random.default_rng(3)
        for _ in range(20):
            state = QuadrotorState(
                rng.standard_normal(3), quat.random_unit(rng), rng.standard_normal(3), rng.uniform(-5, 5, 3)
            )
            wrench = Wrench(rng.uniform(-20, 20, 3), rng.uniform(-0.5, 0.5, 3))
            deriv = rigid_body_derivative(state, wrench, vehicle)
            f_rec, tau_rec = measured_wrench(
                state.q_wb[None], state.omega_b[None], deriv.omega_dot[None], deriv.v_dot[None], vehicle
            )
            assert np.allclose(f_rec[0], wrench.f, atol=1e-10)
            assert np.allclose(tau_rec[0], wrench.tau, atol=1e-10)


class TestAssemble:
    @staticmethod
    def _synthetic_raw(duration=4.0, offset=0.1, skew=1.01):
        # Closed-form trajectory: circular translation + the smooth attitude.
        t_pose = np.arange(0, duration, 1.0 / 400.0)
        p = np.stack(
            [2.0 * np.cos(2 * np.pi * 0.4 * t_pose), 2.0 * np.sin(2 * np.pi * 0.4 * t_pose), 1.0 + 0.3 * t_pose],
            axis=1,
        )
        q = integrate_attitude(t_pose, smooth_omega)
        t_on = (np.arange(0.15, duration - 0.15, 1.0 / 1000.0) - offset) / skew
        gyro = smooth_omega(offset + skew * t_on)
        accel = np.zeros((t_on.size, 3))
        speeds = 1500.0 + 100.0 * np.sin(2 * np.pi * 0.5 * (offset + skew * t_on))[:, None] * np.ones((1, 4))
        return RawLog(
            pose_t=t_pose, pose_p=p, pose_q=q, onboard_t=t_on, gyro=gyro, accel=accel, rotor_speeds=speeds
        )

    def test_assembled_log_is_uniform_and_consistent(self, vehicle):
        raw = self._synthetic_raw()
        log = assemble_flight_log(raw, vehicle)
        dts = np.diff(log.t)
        assert np.allclose(dts, dts[0], rtol=1e-6)
        # Velocity consistent with position by differentiation.
        v_fd = np.gradient(log.p, log.t, axis=0)
        mid = slice(50, -50)
        assert np.max(np.linalg.norm(v_fd[mid] - log.v[mid], axis=1)) < 5e-3
        assert np.allclose(np.linalg.norm(log.q, axis=1), 1.0, atol=1e-9)

    def test_measured_wrench_matches_analytic(self, vehicle):
        raw = self._synthetic_raw()
        log = assemble_flight_log(raw, vehicle)
        # Analytic world acceleration of the circular trajectory.
        w0 = 2 * np.pi * 0.4
        a_true = np.stack(
            [-2.0 * w0**2 * np.cos(w0 * log.t), -2.0 * w0**2 * np.sin(w0 * log.t), np.zeros_like(log.t)], axis=1
        )
        f_true = vehicle.mass * quat.rotate_inverse(log.q, a_true - vehicle.gravity)
        mid = slice(100, -100)
        rms = np.sqrt(np.mean(np.sum((log.f[mid] - f_true[mid]) ** 2, axis=1)))
        assert rms < 1e-2

    def test_round_trip_csv(self, tmp_path, vehicle):
        raw = self._synthetic_raw(duration=2.0)
        log = assemble_flight_log(raw, vehicle)
        path = tmp_path / "log.csv"
        log.to_csv(path)
        back = FlightLog.from_csv(path)
        assert np.allclose(back.t, log.t)
        assert np.allclose(back.f, log.f)

    def test_raw_log_csv_loader_with_mapping(self, tmp_path):
        pose = tmp_path / "pose.csv"
        pose.write_text(
            "stamp,px,py,pz,qw,qx,qy,qz\n" + "\n".join(
                f"{0.0025 * i},{i * 0.1},0.0,1.0,1.0,0.0,0.0,0.0" for i in range(10)
            ) + "\n"
        )
        onboard = tmp_path / "onboard.csv"
        onboard.write_text(
            "t,gx,gy,gz,ax,ay,az,m1,m2,m3,m4\n" + "\n".join(
                f"{0.001 * i},0,0,0,0,0,9.81,1500,1500,1500,1500" for i in range(20)
            ) + "\n"
        )
        raw = load_raw_log(
            pose, onboard,
            column_mapping={"pose": {"t": "stamp"}, "onboard": {"w1": "m1", "w2": "m2", "w3": "m3", "w4": "m4"}},
        )
        assert raw.pose_t.size == 10
        assert raw.rotor_speeds.shape == (20, 4)


class TestSplit:
    @staticmethod
    def _dummy_log(speed: float) -> FlightLog:
        n = 10
        t = np.arange(n) * 1e-3
        vel = np.zeros((n, 3))
        vel[:, 0] = speed
        q = np.tile([1.0, 0, 0, 0], (n, 1))
        z3 = np.zeros((n, 3))
        return FlightLog(
            t=t, p=z3.copy(), q=q, v=vel, omega=z3.copy(), omega_dot=z3.copy(),
            a_w=z3.copy(), rotor_speeds=np.zeros((n, 4)), f=z3.copy(), tau=z3.copy(),
        )

    def test_fractions_within_one_trajectory(self):
        logs = [self._dummy_log(s) for s in np.linspace(0.5, 18.0, 20)]
        train, val, test = split_dataset(logs)
        assert abs(len(train) - 14) <= 1
        assert abs(len(val) - 4) <= 1
        assert abs(len(test) - 2) <= 1
        assert len(train) + len(val) + len(test) == 20

    def test_each_subset_covers_speed_range(self):
        logs = [self._dummy_log(s) for s in np.linspace(0.5, 18.0, 30)]
        train, val, test = split_dataset(logs)
        lo, hi = 0.5, 18.0
        for subset in (train, val, test):
            speeds = [log.mean_speed() for log in subset]
            assert min(speeds) < lo + 0.45 * (hi - lo)
            assert max(speeds) > hi - 0.45 * (hi - lo)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            split_dataset([])


class TestSpeedFilter:
    def test_reduced_dataset_keeps_slow_logs(self):
        logs = [TestSplit._dummy_log(s) for s in (1.0, 3.0, 4.9, 5.1, 9.0)]
        from quadbem.pipeline import filter_logs_by_speed

        kept = filter_logs_by_speed(logs, max_speed=5.0)
        assert [log.mean_speed() for log in kept] == [1.0, 3.0, 4.9]

    def test_invalid_bound_rejected(self):
        from quadbem.pipeline import filter_logs_by_speed

        with pytest.raises(ValueError):
            filter_logs_by_speed([], max_speed=0.0)
