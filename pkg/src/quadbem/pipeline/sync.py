"""Clock synchronisation between the pose stream and the onboard stream.

The onboard clock is mapped into the pose clock through
``t_pose = offset + skew * t_onboard``.  Both parameters are found by
maximising the axis-wise Pearson correlation between the gyro and the
body rates differentiated from the attitude stream: an FFT
cross-correlation over a coarse skew grid seeds a Nelder-Mead refinement
of the continuous objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..errors import SyncFailureError
from .splines import QuaternionTrajectory

MIN_ACCEPT_CORRELATION = 0.9


@dataclass(frozen=True)
class SyncResult:
    offset: float
    skew: float
    correlation: float


def _mean_axis_correlation(rates_a: np.ndarray, rates_b: np.ndarray) -> float:
    """Mean Pearson correlation over the three body axes."""
    total = 0.0
    for k in range(3):
        a = rates_a[:, k] - rates_a[:, k].mean()
        b = rates_b[:, k] - rates_b[:, k].mean()
        denom = np.linalg.norm(a) * np.linalg.norm(b)
        total += float(a @ b / denom) if denom > 0 else 0.0
    return total / 3.0


def sync_clocks(
    attitude: QuaternionTrajectory,
    onboard_t: np.ndarray,
    gyro: np.ndarray,
    skew_range: tuple[float, float] = (0.95, 1.05),
    skew_steps: int = 41,
    min_correlation: float = MIN_ACCEPT_CORRELATION,
) -> SyncResult:
    """Estimate (offset, skew) aligning the onboard clock with the pose clock.

    Raises :class:`SyncFailureError` when the best correlation stays below
    ``min_correlation`` (e.g. uncorrelated or noise-only rate signals).
    """
    onboard_t = np.asarray(onboard_t, dtype=float)
    gyro = np.asarray(gyro, dtype=float)
    if gyro.shape != (onboard_t.size, 3):
        raise ValueError("gyro must be (N, 3)")
    if onboard_t.size < 32:
        raise SyncFailureError("too few onboard samples to synchronise")

    dt = float(np.median(np.diff(onboard_t)))
    t0_pose, t1_pose = attitude.t[0], attitude.t[-1]
    duration_pose = t1_pose - t0_pose
    gyro_c = gyro - gyro.mean(axis=0)

    best = (-np.inf, 0.0, 1.0)
    for skew in np.linspace(skew_range[0], skew_range[1], skew_steps):
        # Sample the spline rates on the warped onboard grid spacing so one
        # FFT correlation per skew scans every integer-lag offset.
        warped = onboard_t * skew
        n_ref = int(duration_pose / (skew * dt))
        if n_ref < 16:
            continue
        t_ref = t0_pose + np.arange(n_ref) * skew * dt
        ref = attitude.body_rate(t_ref)
        ref_c = ref - ref.mean(axis=0)
        n_fft = int(2 ** np.ceil(np.log2(n_ref + onboard_t.size)))
        score = np.zeros(n_fft)
        for k in range(3):
            fa = np.fft.rfft(ref_c[:, k], n_fft)
            fb = np.fft.rfft(gyro_c[:, k], n_fft)
            score += np.fft.irfft(fa * np.conj(fb), n_fft)
        lag = int(np.argmax(score))
        if lag > n_fft // 2:
            lag -= n_fft
        # ref[i] pairs with gyro[i - lag]: offset makes warped[i-lag] = t_ref[i].
        offset = float(t0_pose + lag * skew * dt - warped[0])
        corr = _objective(attitude, onboard_t, gyro, offset, skew)
        if corr > best[0]:
            best = (corr, offset, skew)

    if not np.isfinite(best[0]) or best[0] <= -np.inf:
        raise SyncFailureError("coarse sync search found no overlap")

    result = minimize(
        lambda x: -_objective(attitude, onboard_t, gyro, x[0], x[1]),
        x0=np.array([best[1], best[2]]),
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 400},
    )
    offset, skew = float(result.x[0]), float(result.x[1])
    corr = _objective(attitude, onboard_t, gyro, offset, skew)
    if corr < min_correlation:
        raise SyncFailureError(f"peak rate correlation {corr:.3f} below {min_correlation}")
    return SyncResult(offset=offset, skew=skew, correlation=corr)


def _objective(attitude: QuaternionTrajectory, onboard_t, gyro, offset: float, skew: float) -> float:
    t_mapped = offset + skew * onboard_t
    inside = (t_mapped >= attitude.t[0]) & (t_mapped <= attitude.t[-1])
    if inside.sum() < max(32, 0.2 * onboard_t.size):
        return -1.0
    rates = attitude.body_rate(t_mapped[inside])
    return _mean_axis_correlation(rates, gyro[inside])
