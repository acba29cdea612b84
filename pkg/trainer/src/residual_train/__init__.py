"""Residual-network training and bundle export for quadbem."""

from .datasets import WindowDataset, load_log_dir, make_examples, rotor_model_wrench
from .export import PARITY_TOLERANCE, export_bundle, to_bundle, verify_parity
from .model import ResidualNet
from .train import TrainedModel, TrainingConfig, train

__all__ = [
    "WindowDataset",
    "load_log_dir",
    "make_examples",
    "rotor_model_wrench",
    "PARITY_TOLERANCE",
    "export_bundle",
    "to_bundle",
    "verify_parity",
    "ResidualNet",
    "TrainedModel",
    "TrainingConfig",
    "train",
]
