"""Bundle export with cross-implementation parity verification."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from quadbem.residual import Layer, ResidualNetBundle, forward, save_bundle
from quadbem.residual.arch import layer_plan

from .train import TrainedModel

PARITY_TOLERANCE = 1e-4
PARITY_SAMPLES = 100


def to_bundle(trained: TrainedModel) -> ResidualNetBundle:
    """Pack the torch weights into the portable bundle structure."""
    plan = layer_plan(trained.config.architecture)
    arrays = trained.net.export_arrays()

    def stage(name):
        layers = []
        queue = list(arrays[name])
        for item in plan[name]:
            if item[0] in ("flatten", "last-step"):
                layers.append(Layer(kind=item[0]))
            else:
                weight, bias = queue.pop(0)
                dilation = item[3] if item[0] == "causal-conv1d" else 1
                layers.append(
                    Layer(kind=item[0], weight=weight.astype(np.float64), bias=bias.astype(np.float64), dilation=dilation)
                )
        return tuple(layers)

    return ResidualNetBundle(
        architecture=trained.config.architecture,
        encoder=stage("encoder"),
        force_head=stage("force_head"),
        torque_head=stage("torque_head"),
        input_mean=trained.input_mean.astype(np.float64),
        input_std=trained.input_std.astype(np.float64),
        output_std=trained.output_std.astype(np.float64),
    )


def verify_parity(trained: TrainedModel, bundle: ResidualNetBundle, windows: np.ndarray,
                  n_samples: int = PARITY_SAMPLES) -> float:
    """Max |train-side - inference-engine| output over sample windows."""
    sample = windows[:n_samples]
    ours = trained.predict(sample)
    theirs = np.stack([forward(bundle, w) for w in sample])
    return float(np.max(np.abs(ours - theirs)))


def export_bundle(trained: TrainedModel, path: str | Path, parity_windows: np.ndarray) -> float:
    """Write the bundle after checking parity; a failing check rejects the export."""
    bundle = to_bundle(trained)
    gap = verify_parity(trained, bundle, parity_windows)
    if gap > PARITY_TOLERANCE:
        raise RuntimeError(
            f"parity check failed: max |delta| = {gap:.3e} > {PARITY_TOLERANCE}; export rejected"
        )
    save_bundle(bundle, path)
    return gap
