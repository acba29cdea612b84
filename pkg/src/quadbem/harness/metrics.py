"""Evaluation metrics: grouped wrench RMSE and closed-loop positional RMSE."""

from __future__ import annotations

import numpy as np

from ..pipeline.flightlog import FlightLog

METRIC_KEYS = ("F_xy", "F_z", "M_xy", "M_z", "F", "M")


def _pooled_rmse(err: np.ndarray) -> float:
    """RMSE over all components of the pooled error block."""
    return float(np.sqrt(np.mean(err**2)))


def wrench_rmse_arrays(
    f_pred: np.ndarray,
    tau_pred: np.ndarray,
    f_label: np.ndarray,
    tau_label: np.ndarray,
    per_axis_mean: bool = False,
) -> dict[str, float]:
    """Grouped force/torque RMSE between prediction and label arrays.

    The xy groups pool both components into one RMSE (default); F and M
    pool all three.  ``per_axis_mean`` switches the xy and total groups to
    the mean of per-axis RMSEs instead of pooling.
    """
    f_pred = np.asarray(f_pred, dtype=float)
    tau_pred = np.asarray(tau_pred, dtype=float)
    f_label = np.asarray(f_label, dtype=float)
    tau_label = np.asarray(tau_label, dtype=float)
    if f_pred.size == 0:
        raise ValueError("empty prediction arrays")
    if f_pred.shape != f_label.shape or tau_pred.shape != tau_label.shape:
        raise ValueError("prediction arrays must match the label sample count")
    ef = f_pred - f_label
    et = tau_pred - tau_label

    def group(err, idx):
        if per_axis_mean:
            return float(np.mean([_pooled_rmse(err[:, i]) for i in idx]))
        return _pooled_rmse(err[:, idx])

    return {
        "F_xy": group(ef, [0, 1]),
        "F_z": _pooled_rmse(ef[:, 2]),
        "M_xy": group(et, [0, 1]),
        "M_z": _pooled_rmse(et[:, 2]),
        "F": group(ef, [0, 1, 2]),
        "M": group(et, [0, 1, 2]),
    }


def wrench_rmse(
    f_pred: np.ndarray,
    tau_pred: np.ndarray,
    log: FlightLog,
    per_axis_mean: bool = False,
) -> dict[str, float]:
    """Grouped force/torque RMSE against a log's measured wrench."""
    if len(log) == 0:
        raise ValueError("empty flight log")
    return wrench_rmse_arrays(f_pred, tau_pred, log.f, log.tau, per_axis_mean=per_axis_mean)


def closed_loop_rmse(p_sim: np.ndarray, p_ref: np.ndarray) -> float:
    """Positional RMSE sqrt(mean ||p_sim - p_ref||^2) on a common grid."""
    p_sim = np.asarray(p_sim, dtype=float)
    p_ref = np.asarray(p_ref, dtype=float)
    if p_sim.shape != p_ref.shape:
        raise ValueError(f"misaligned grids: {p_sim.shape} vs {p_ref.shape}")
    if p_sim.size == 0:
        raise ValueError("empty trajectories")
    return float(np.sqrt(np.mean(np.sum((p_sim - p_ref) ** 2, axis=1))))
