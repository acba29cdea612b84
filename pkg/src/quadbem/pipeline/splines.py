"""Smoothing splines and attitude differentiation for flight-log fusion.

Scalar channels get a cubic smoothing spline whose smoothing factor comes
from a per-channel noise estimate (median absolute second difference);
noise-free data degenerates to an interpolating not-a-knot spline, which
reproduces polynomials up to degree three exactly.

Attitude is handled on the unit-quaternion manifold: body rates and
angular accelerations come from local cubic fits of the rotation vector
in the tangent space at the nearest sample, mapped back through the
right Jacobian of the exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, UnivariateSpline

from .. import quaternion as quat


def estimate_noise_sigma(y: np.ndarray) -> float:
    """Noise standard deviation from the median absolute second difference.

    For white noise the second difference has variance 6 sigma^2; the
    median-absolute estimator divides by 0.6745 to be consistent at the
    Gaussian.  Second differences of a densely sampled smooth signal are
    slowly varying (strong positive lag-1 correlation) while those of
    noise anti-correlate, so a positive correlation marks the channel as
    effectively noise-free rather than letting curvature masquerade as
    noise.
    """
    y = np.asarray(y, dtype=float)
    if y.size < 6:
        return 0.0
    d2 = np.diff(y, n=2)
    spread = float(np.std(d2))
    if spread == 0.0:
        return 0.0
    lag1 = float(np.mean(d2[:-1] * d2[1:])) / spread**2
    if lag1 > 0.5:
        return 0.0
    return float(np.median(np.abs(d2)) / (np.sqrt(6.0) * 0.6745))


@dataclass
class ScalarSpline:
    """Value/derivative/second-derivative evaluator for one channel."""

    _f: object
    _df: object
    _d2f: object

    def value(self, t):
        return self._f(t)

    def derivative(self, t):
        return self._df(t)

    def second_derivative(self, t):
        return self._d2f(t)


def fit_scalar_spline(t: np.ndarray, y: np.ndarray, smoothing: float | None = None) -> ScalarSpline:
    """Cubic smoothing spline for one channel.

    ``smoothing`` overrides the automatic noise-based factor; zero forces
    exact interpolation.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.ndim != 1 or t.shape != y.shape:
        raise ValueError("t and y must be equal-length 1-D arrays")
    if t.size < 4:
        raise ValueError(f"need at least 4 points to fit a cubic spline, got {t.size}")
    if np.any(np.diff(t) <= 0):
        raise ValueError("sample times must be strictly increasing")

    if smoothing is None:
        sigma = estimate_noise_sigma(y)
        scale = max(float(np.max(np.abs(y))), 1.0)
        smoothing = 0.0 if sigma < 1e-10 * scale else t.size * sigma**2

    if smoothing == 0.0:
        f = CubicSpline(t, y)  # not-a-knot: exact for cubic polynomials
    else:
        f = UnivariateSpline(t, y, k=3, s=smoothing)
    return ScalarSpline(f, f.derivative(1), f.derivative(2))


@dataclass
class VectorSpline:
    channels: list[ScalarSpline]

    def value(self, t):
        return np.stack([c.value(t) for c in self.channels], axis=-1)

    def derivative(self, t):
        return np.stack([c.derivative(t) for c in self.channels], axis=-1)

    def second_derivative(self, t):
        return np.stack([c.second_derivative(t) for c in self.channels], axis=-1)


def fit_splines(t: np.ndarray, values: np.ndarray, smoothing: float | None = None) -> VectorSpline:
    """Per-channel cubic smoothing splines over a (N, k) value array."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] == np.asarray(t).size and values.ndim == 2:
        cols = values.T
    else:
        raise ValueError("values must be (N, k) with N matching t")
    return VectorSpline([fit_scalar_spline(t, col, smoothing) for col in cols])


def _skew_batch(v: np.ndarray) -> np.ndarray:
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def _right_jacobian_batch(v: np.ndarray) -> np.ndarray:
    """Right Jacobian of the SO(3) exponential, batched over leading axes."""
    theta = np.linalg.norm(v, axis=-1)
    vx = _skew_batch(v)
    vx2 = vx @ vx
    small = theta < 1e-6
    theta_safe = np.where(small, 1.0, theta)
    a = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(theta_safe)) / theta_safe**2)
    b = np.where(small, 1.0 / 6.0 - theta**2 / 120.0, (theta_safe - np.sin(theta_safe)) / theta_safe**3)
    return np.eye(3) - a[..., None, None] * vx + b[..., None, None] * vx2


class QuaternionTrajectory:
    """Attitude stream with smooth body rates and angular accelerations.

    Each pose sample anchors a local least-squares cubic of the rotation
    vector log(q_i^-1 q_j) over a window of neighbours; queries are routed
    to the nearest anchor.  At the anchor the rotation vector vanishes, so
    the fitted derivatives map to body rates through the right Jacobian
    with only a small correction between samples.
    """

    WINDOW = 4  # neighbours each side
    DEGREE = 3

    def __init__(self, t: np.ndarray, q: np.ndarray):
        t = np.asarray(t, dtype=float)
        q = np.asarray(q, dtype=float)
        if q.shape != (t.size, 4):
            raise ValueError("q must be (N, 4)")
        if t.size < 2 * self.WINDOW + 1:
            raise ValueError(f"need at least {2 * self.WINDOW + 1} attitude samples")
        # Hemisphere alignment for a continuous representation.
        q = q.copy()
        for i in range(1, q.shape[0]):
            if np.dot(q[i], q[i - 1]) < 0.0:
                q[i] = -q[i]
        self.t = t
        self.q = quat.normalize(q)
        self._fit_windows()

    def _fit_windows(self):
        n = self.t.size
        m = self.WINDOW
        starts = np.clip(np.arange(n) - m, 0, n - (2 * m + 1))
        idx = starts[:, None] + np.arange(2 * m + 1)[None, :]
        # Tangent coordinates of each window around its anchor sample.
        q_anchor = self.q[:, None, :]
        q_win = self.q[idx]
        rel = quat.multiply(quat.conjugate(np.broadcast_to(q_anchor, q_win.shape)), q_win)
        v = quat.log_map(rel)  # (n, w, 3)
        tau = self.t[idx] - self.t[:, None]  # (n, w)
        # Least squares cubic per anchor: v(tau) ~ sum_k c_k tau^k.
        A = tau[..., None] ** np.arange(self.DEGREE + 1)[None, None, :]  # (n, w, 4)
        AtA = np.einsum("nwi,nwj->nij", A, A)
        Atv = np.einsum("nwi,nwk->nik", A, v)
        self._coeffs = np.linalg.solve(AtA, Atv)  # (n, 4, 3)

    def _nearest(self, t_query: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.t, t_query)
        pos = np.clip(pos, 1, self.t.size - 1)
        left = np.abs(t_query - self.t[pos - 1]) <= np.abs(self.t[pos] - t_query)
        return np.where(left, pos - 1, pos)

    def _eval_tangent(self, t_query: np.ndarray):
        t_query = np.atleast_1d(np.asarray(t_query, dtype=float))
        anchors = self._nearest(t_query)
        tau = t_query - self.t[anchors]
        powers = tau[:, None] ** np.arange(self.DEGREE + 1)[None, :]
        d1 = np.arange(self.DEGREE + 1)[None, :] * np.concatenate(
            [np.zeros((t_query.size, 1)), powers[:, :-1]], axis=1
        )
        k = np.arange(self.DEGREE + 1)
        d2 = (k * (k - 1))[None, :] * np.concatenate([np.zeros((t_query.size, 2)), powers[:, :-2]], axis=1)
        coeffs = self._coeffs[anchors]  # (m, 4, 3)
        v = np.einsum("mk,mkd->md", powers, coeffs)
        v_dot = np.einsum("mk,mkd->md", d1, coeffs)
        v_ddot = np.einsum("mk,mkd->md", d2, coeffs)
        return anchors, v, v_dot, v_ddot

    def value(self, t_query) -> np.ndarray:
        anchors, v, _, _ = self._eval_tangent(t_query)
        return quat.normalize(quat.multiply(self.q[anchors], quat.exp_map(v)))

    def body_rate(self, t_query) -> np.ndarray:
        """omega_B = J_r(v) v_dot at the query times."""
        _, v, v_dot, _ = self._eval_tangent(t_query)
        return np.einsum("mij,mj->mi", _right_jacobian_batch(v), v_dot)

    def body_rate_derivative(self, t_query) -> np.ndarray:
        """Angular acceleration; the J_r rate term enters at second order."""
        _, v, v_dot, v_ddot = self._eval_tangent(t_query)
        jr = _right_jacobian_batch(v)
        # d/dt J_r(v) ~ -0.5 [v_dot]x near v = 0.
        jr_dot = -0.5 * _skew_batch(v_dot)
        return np.einsum("mij,mj->mi", jr, v_ddot) + np.einsum("mij,mj->mi", jr_dot, v_dot)
