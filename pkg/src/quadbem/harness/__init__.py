"""Closed-loop simulation, trajectories, controller, and metrics."""

from .controller import CascadedController, ControllerGains, allocation_matrix
from .metrics import METRIC_KEYS, closed_loop_rmse, wrench_rmse, wrench_rmse_arrays
from .simulate import (
    ROTOR_MODELS,
    RotorModel,
    SimConfig,
    SimResult,
    identify_quadratic_from_bem,
    track_and_simulate,
)
from .trajectories import FAMILIES, TrajectorySpec, generate_reference

__all__ = [
    "CascadedController",
    "ControllerGains",
    "allocation_matrix",
    "METRIC_KEYS",
    "closed_loop_rmse",
    "wrench_rmse",
    "wrench_rmse_arrays",
    "ROTOR_MODELS",
    "RotorModel",
    "SimConfig",
    "SimResult",
    "identify_quadratic_from_bem",
    "track_and_simulate",
    "FAMILIES",
    "TrajectorySpec",
    "generate_reference",
]
