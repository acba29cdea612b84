"""Zero-phase Butterworth low-pass for motor-speed channels."""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import butter, sosfiltfilt

# Forward-backward application squares the magnitude response, so the
# underlying filter is designed at cutoff / (sqrt(2)-1)^(1/8) to put the
# net response at -3 dB at the nominal cutoff.
FILTFILT_CUTOFF_CORRECTION = (math.sqrt(2.0) - 1.0) ** (-1.0 / 8.0)
DEFAULT_TAU_MOTOR = 0.033


def motor_cutoff_hz(tau_motor: float = DEFAULT_TAU_MOTOR) -> float:
    """Cutoff matched to the motor time constant: 1 / (2 pi tau)."""
    if tau_motor <= 0:
        raise ValueError(f"tau_motor must be positive, got {tau_motor}")
    return 1.0 / (2.0 * math.pi * tau_motor)


def filter_motor_speeds(series: np.ndarray, fs: float, cutoff_hz: float | None = None,
                        tau_motor: float = DEFAULT_TAU_MOTOR) -> np.ndarray:
    """Fourth-order Butterworth low-pass, applied forward-backward.

    ``series`` is (N,) or (N, k) sampled uniformly at ``fs``.  The default
    cutoff corresponds to the motor time constant (~4.8 Hz at 33 ms).  The
    net response is -3 dB at the cutoff despite the double pass.
    """
    series = np.asarray(series, dtype=float)
    if cutoff_hz is None:
        cutoff_hz = motor_cutoff_hz(tau_motor)
    design = cutoff_hz * FILTFILT_CUTOFF_CORRECTION
    if design >= 0.5 * fs:
        raise ValueError(f"cutoff {cutoff_hz} Hz too close to Nyquist ({0.5 * fs} Hz)")
    sos = butter(4, design, fs=fs, output="sos")
    # Default padding is far shorter than the filter settling time at low
    # cutoffs; pad several time constants so edges settle cleanly.
    padlen = min(series.shape[0] - 1, int(np.ceil(6.0 * fs / design)))
    return sosfiltfilt(sos, series, axis=0, padlen=padlen)
