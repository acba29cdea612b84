"""Torch mirror of the inference engine's layer plans."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from quadbem.residual.arch import layer_plan

LEAKY_SLOPE = 0.01


class CausalConv1d(nn.Module):
    """Kernel-3 dilated conv over time with left-only padding."""

    def __init__(self, in_ch: int, out_ch: int, dilation: int, kernel: int = 3):
        super().__init__()
        self.pad = (kernel - 1) * dilation
        self.conv = nn.Conv1d(in_ch, out_ch, kernel, dilation=dilation)

    def forward(self, x):  # x: (batch, channels, time)
        return self.conv(nn.functional.pad(x, (self.pad, 0)))


class ResidualNet(nn.Module):
    """Encoder plus force/torque heads following a quadbem layer plan.

    Input windows are (batch, time, features); output is the raw
    6-vector before the per-output scale is applied.
    """

    def __init__(self, tag: str):
        super().__init__()
        self.tag = tag
        plan = layer_plan(tag)
        self.is_tcn = tag.startswith("tcn")

        enc = []
        for item in plan["encoder"]:
            if item[0] == "causal-conv1d":
                enc.append(CausalConv1d(item[1], item[2], item[3]))
            elif item[0] == "dense":
                enc.append(nn.Linear(item[1], item[2]))
        self.encoder = nn.ModuleList(enc)

        def head(stage):
            return nn.ModuleList([nn.Linear(item[1], item[2]) for item in stage if item[0] == "dense"])

        self.force_head = head(plan["force_head"])
        self.torque_head = head(plan["torque_head"])

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.is_tcn:
            h = x.transpose(1, 2)  # (batch, features, time)
            for layer in self.encoder:
                h = nn.functional.leaky_relu(layer(h), LEAKY_SLOPE)
            h = h[:, :, -1]  # newest-step readout
        else:
            h = x.flatten(1)
            for layer in self.encoder:
                h = nn.functional.leaky_relu(layer(h), LEAKY_SLOPE)

        def run_head(layers, z):
            for i, layer in enumerate(layers):
                z = layer(z)
                if i < len(layers) - 1:
                    z = nn.functional.leaky_relu(z, LEAKY_SLOPE)
            return z

        f = run_head(self.force_head, h)
        tau = run_head(self.torque_head, h)
        return torch.cat([f, tau], dim=1)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def export_arrays(self) -> dict[str, list[tuple[np.ndarray, np.ndarray]]]:
        """Weights/biases per stage, float32, in plan order."""

        def dump(layers):
            out = []
            for layer in layers:
                mod = layer.conv if isinstance(layer, CausalConv1d) else layer
                out.append(
                    (
                        mod.weight.detach().cpu().numpy().astype(np.float32),
                        mod.bias.detach().cpu().numpy().astype(np.float32),
                    )
                )
            return out

        return {
            "encoder": dump(self.encoder),
            "force_head": dump(self.force_head),
            "torque_head": dump(self.torque_head),
        }
