"""Forward pass of a residual-network bundle (numpy, allocation-light)."""

from __future__ import annotations

import numpy as np

from ..core import Wrench
from ..errors import HistoryNotReadyError
from .bundle import Layer, ResidualNetBundle
from .history import HistoryBuffer


def _leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x >= 0.0, x, slope * x)


def _apply_layer(layer: Layer, x: np.ndarray) -> np.ndarray:
    if layer.kind == "flatten":
        return x.reshape(-1)
    if layer.kind == "last-step":
        return x[-1]
    if layer.kind == "dense":
        return layer.weight @ x + layer.bias
    # causal-conv1d on (time, channels): tap k reaches (K-1-k)*d steps back.
    w, d = layer.weight, layer.dilation
    out_ch, _, kernel = w.shape
    t_len = x.shape[0]
    pad = (kernel - 1) * d
    xp = np.vstack([np.zeros((pad, x.shape[1])), x])
    out = np.tile(layer.bias, (t_len, 1))
    for k in range(kernel):
        out += xp[k * d : k * d + t_len] @ w[:, :, k].T
    return out


def _run_stage(layers, x, slope, *, final_linear):
    for i, layer in enumerate(layers):
        x = _apply_layer(layer, x)
        is_last = i == len(layers) - 1
        if layer.kind in ("dense", "causal-conv1d") and not (final_linear and is_last):
            x = _leaky_relu(x, slope)
    return x


def forward(bundle: ResidualNetBundle, history_rows: np.ndarray) -> np.ndarray:
    """Raw 6-vector (f_res, tau_res) for a (20, 10) history block."""
    x = np.asarray(history_rows, dtype=float)
    if x.shape != (bundle.history_length, bundle.features):
        raise HistoryNotReadyError(
            f"history must be ({bundle.history_length}, {bundle.features}), got {x.shape}"
        )
    x = (x - bundle.input_mean) / bundle.input_std
    enc = _run_stage(bundle.encoder, x, bundle.activation_slope, final_linear=False)
    f = _run_stage(bundle.force_head, enc, bundle.activation_slope, final_linear=True)
    tau = _run_stage(bundle.torque_head, enc, bundle.activation_slope, final_linear=True)
    return np.concatenate([f, tau]) * bundle.output_std


def predict_residual(bundle: ResidualNetBundle, history: HistoryBuffer | np.ndarray) -> Wrench:
    """Residual body wrench predicted from the state/motor history."""
    rows = history.as_array() if isinstance(history, HistoryBuffer) else history
    out = forward(bundle, rows)
    return Wrench(f=out[:3], tau=out[3:])
