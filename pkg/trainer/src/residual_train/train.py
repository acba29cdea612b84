"""Supervised training of the residual network."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .datasets import WindowDataset
from .model import ResidualNet

TORQUE_WEIGHT = 30.0  # N*m scaled to the same magnitude as N on this platform


@dataclass
class TrainingConfig:
    architecture: str = "tcn-medium"
    learning_rate: float = 1e-3
    batch_size: int = 256
    epochs: int = 50
    seed: int = 0
    val_fraction: float = 0.2
    torque_weight: float = TORQUE_WEIGHT
    curve_path: str | Path | None = None  # per-epoch train/val loss CSV

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.epochs <= 0:
            raise ValueError("hyperparameters must be positive")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")


@dataclass
class TrainedModel:
    """Torch model plus the frozen normalization statistics."""

    net: ResidualNet
    input_mean: np.ndarray
    input_std: np.ndarray
    output_std: np.ndarray
    config: TrainingConfig
    history: list[dict] = field(default_factory=list)

    def predict(self, windows: np.ndarray) -> np.ndarray:
        """Physical-unit predictions, batched; the training-side forward pass."""
        x = (windows.astype(np.float32) - self.input_mean) / self.input_std
        with torch.no_grad():
            raw = self.net(torch.from_numpy(x)).numpy()
        return raw * self.output_std


def _weighted_rmse(pred: torch.Tensor, target: torch.Tensor, torque_weight: float) -> torch.Tensor:
    scale = torch.tensor([1.0, 1.0, 1.0, torque_weight, torque_weight, torque_weight], dtype=pred.dtype)
    err = (pred - target) * scale
    return torch.sqrt(torch.mean(err**2))


def train(dataset: WindowDataset, config: TrainingConfig) -> TrainedModel:
    """Minimize the weighted force/torque RMSE with Adam.

    Input normalization and the per-output scale are frozen from the
    training split and travel with the exported bundle.  A non-finite
    loss aborts with diagnostics.  Fully deterministic under the seed.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    torch.manual_seed(config.seed)
    torch.use_deterministic_algorithms(True)
    torch.set_num_threads(1)

    train_set, val_set = dataset.split(config.val_fraction)

    input_mean = train_set.windows.reshape(-1, train_set.windows.shape[-1]).mean(axis=0)
    input_std = train_set.windows.reshape(-1, train_set.windows.shape[-1]).std(axis=0)
    input_std = np.maximum(input_std, 1e-6).astype(np.float32)
    input_mean = input_mean.astype(np.float32)
    output_std = np.maximum(train_set.labels.std(axis=0), 1e-6).astype(np.float32)

    def tensors(split):
        x = (split.windows - input_mean) / input_std
        y = split.labels / output_std
        return torch.from_numpy(x), torch.from_numpy(y)

    x_train, y_train = tensors(train_set)
    x_val, y_val = tensors(val_set)
    out_scale = torch.from_numpy(output_std)

    net = ResidualNet(config.architecture)
    optimizer = torch.optim.Adam(net.parameters(), lr=config.learning_rate)
    generator = torch.Generator().manual_seed(config.seed)

    history = []
    n = x_train.shape[0]
    for epoch in range(config.epochs):
        net.train()
        order = torch.randperm(n, generator=generator)
        epoch_loss = 0.0
        batches = 0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            optimizer.zero_grad()
            pred = net(x_train[idx]) * out_scale
            target = y_train[idx] * out_scale
            loss = _weighted_rmse(pred, target, config.torque_weight)
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged at epoch {epoch}, batch {batches}: loss={loss.item()}, "
                    f"lr={config.learning_rate}, arch={config.architecture}"
                )
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            batches += 1
        net.eval()
        with torch.no_grad():
            val_loss = float(_weighted_rmse(net(x_val) * out_scale, y_val * out_scale, config.torque_weight))
        history.append({"epoch": epoch, "train_loss": epoch_loss / max(batches, 1), "val_loss": val_loss})

    if config.curve_path is not None:
        with open(config.curve_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["epoch", "train_loss", "val_loss"])
            writer.writeheader()
            writer.writerows(history)

    return TrainedModel(
        net=net, input_mean=input_mean, input_std=input_std, output_std=output_std,
        config=config, history=history,
    )
