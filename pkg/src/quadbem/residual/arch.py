"""Architecture plans for the residual network family.

Channel widths are chosen so the parameter counts land on the published
targets: TCN small/medium/large near 12k/25k/72k and the MLP near 30k.
TCN encoders use kernel-3 causal convolutions with dilations (1, 2, 4, 8)
read out at the newest time step: the receptive field (31 steps) covers
the whole 20-row history, so every row reaches the output while the
readout still sees the current state directly.  The MLP flattens the
whole window.  Two dense heads (force, torque) sit on either encoder.
"""

from __future__ import annotations

import numpy as np

from .bundle import HISTORY_LENGTH, INPUT_FEATURES, Layer, ResidualNetBundle

TCN_CHANNELS = {"tcn-small": (32, 16), "tcn-medium": (48, 24), "tcn-large": (84, 32)}
MLP_WIDTHS = (96, 64, 32)
DILATIONS = (1, 2, 4, 8)
KERNEL = 3

# Published parameter budgets per architecture tag.
PARAMETER_TARGETS = {"tcn-small": 12_000, "tcn-medium": 25_000, "tcn-large": 72_000, "mlp": 30_000}


def _dense(n_in: int, n_out: int) -> Layer:
    return Layer(kind="dense", weight=np.zeros((n_out, n_in)), bias=np.zeros(n_out))


def _conv(n_in: int, n_out: int, dilation: int) -> Layer:
    return Layer(kind="causal-conv1d", weight=np.zeros((n_out, n_in, KERNEL)), bias=np.zeros(n_out), dilation=dilation)


def layer_plan(tag: str) -> dict[str, list[tuple]]:
    """Shape-only description of the layers for an architecture tag."""
    if tag in TCN_CHANNELS:
        channels, head = TCN_CHANNELS[tag]
        encoder = [("causal-conv1d", INPUT_FEATURES, channels, DILATIONS[0])]
        encoder += [("causal-conv1d", channels, channels, d) for d in DILATIONS[1:]]
        encoder.append(("last-step",))
        heads = [("dense", channels, head), ("dense", head, 3)]
    elif tag == "mlp":
        w1, w2, head = MLP_WIDTHS
        flat = HISTORY_LENGTH * INPUT_FEATURES
        encoder = [("flatten",), ("dense", flat, w1), ("dense", w1, w2)]
        heads = [("dense", w2, head), ("dense", head, 3)]
    else:
        raise ValueError(f"unknown architecture tag {tag!r}")
    return {"encoder": encoder, "force_head": heads, "torque_head": list(heads)}


def build_architecture(tag: str) -> ResidualNetBundle:
    """Zero-initialized bundle for an architecture tag.

    Deterministic by construction: two calls with the same tag return
    identical layer plans (and identical all-zero weights).
    """
    plan = layer_plan(tag)

    def realize(stage):
        layers = []
        for item in stage:
            if item[0] == "dense":
                layers.append(_dense(item[1], item[2]))
            elif item[0] == "causal-conv1d":
                layers.append(_conv(item[1], item[2], item[3]))
            else:
                layers.append(Layer(kind=item[0]))
        return tuple(layers)

    return ResidualNetBundle(
        architecture=tag,
        encoder=realize(plan["encoder"]),
        force_head=realize(plan["force_head"]),
        torque_head=realize(plan["torque_head"]),
        input_mean=np.zeros(INPUT_FEATURES),
        input_std=np.ones(INPUT_FEATURES),
        output_std=np.ones(6),
    )
