"""Learned residual wrench: history features, bundle format, inference."""

from .arch import PARAMETER_TARGETS, build_architecture, layer_plan
from .bundle import Layer, ResidualNetBundle, load_bundle, save_bundle
from .history import (
    FEATURES,
    HISTORY_LENGTH,
    STEP_MS,
    HistoryBuffer,
    decimation_offsets,
    feature_row,
    history_from_dense,
)
from .network import forward, predict_residual

__all__ = [
    "PARAMETER_TARGETS",
    "build_architecture",
    "layer_plan",
    "Layer",
    "ResidualNetBundle",
    "load_bundle",
    "save_bundle",
    "FEATURES",
    "HISTORY_LENGTH",
    "STEP_MS",
    "HistoryBuffer",
    "decimation_offsets",
    "feature_row",
    "history_from_dense",
    "forward",
    "predict_residual",
]
