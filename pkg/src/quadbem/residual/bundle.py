"""Portable residual-network weight bundle.

A bundle is a single JSON file: a structured header (architecture tag,
layer shapes, activation slope, normalization statistics, format version)
with every numeric array base64-encoded as little-endian float32 in
declared order.  The encoding is canonical — sorted keys, fixed
separators — so export -> load -> export is byte-identical.

Layer kinds:

``dense``            y = W x + b, weight shape (out, in)
``causal-conv1d``    y[t] = b + sum_k W[:, :, k] x[t - (K-1-k) d]
``flatten``          (T, C) -> (T*C,) row-major
``last-step``        (T, C) -> (C,) features at the newest time step

A leaky-ReLU follows every layer except the last layer of each head,
which stays linear.  Inputs are normalized per feature with the stored
mean/std; the six outputs are scaled by the stored per-output std.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import BundleFormatError

FORMAT_VERSION = 1
INPUT_FEATURES = 10
HISTORY_LENGTH = 20
OUTPUTS = 6
ARCHITECTURES = ("mlp", "tcn-small", "tcn-medium", "tcn-large")


def _encode(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f4").tobytes()).decode("ascii")


def _decode(text: str, shape: tuple[int, ...]) -> np.ndarray:
    raw = base64.b64decode(text.encode("ascii"))
    arr = np.frombuffer(raw, dtype="<f4")
    expected = int(np.prod(shape)) if shape else arr.size
    if arr.size != expected:
        raise BundleFormatError(f"array payload holds {arr.size} floats, header declares {shape}")
    return arr.reshape(shape).astype(np.float64)


@dataclass(frozen=True)
class Layer:
    kind: str
    weight: np.ndarray | None = None
    bias: np.ndarray | None = None
    dilation: int = 1

    def __post_init__(self):
        if self.kind not in ("dense", "causal-conv1d", "flatten", "last-step"):
            raise BundleFormatError(f"unknown layer kind {self.kind!r}")
        if self.kind in ("dense", "causal-conv1d"):
            if self.weight is None or self.bias is None:
                raise BundleFormatError(f"{self.kind} layer needs weight and bias")
            if not (np.all(np.isfinite(self.weight)) and np.all(np.isfinite(self.bias))):
                raise BundleFormatError("layer arrays must be finite")

    @property
    def parameter_count(self) -> int:
        if self.weight is None:
            return 0
        return int(self.weight.size + self.bias.size)


@dataclass(frozen=True)
class ResidualNetBundle:
    """Architecture + weights + normalization, ready for inference."""

    architecture: str
    encoder: tuple[Layer, ...]
    force_head: tuple[Layer, ...]
    torque_head: tuple[Layer, ...]
    input_mean: np.ndarray
    input_std: np.ndarray
    output_std: np.ndarray
    activation_slope: float = 0.01
    history_length: int = HISTORY_LENGTH
    features: int = INPUT_FEATURES

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise BundleFormatError(f"unknown architecture {self.architecture!r}")
        for name, arr, n in (
            ("input_mean", self.input_mean, self.features),
            ("input_std", self.input_std, self.features),
            ("output_std", self.output_std, OUTPUTS),
        ):
            a = np.asarray(arr, dtype=float)
            if a.shape != (n,) or not np.all(np.isfinite(a)):
                raise BundleFormatError(f"{name} must be {n} finite values")
            object.__setattr__(self, name, a)
        if np.any(self.input_std <= 0) or np.any(self.output_std <= 0):
            raise BundleFormatError("normalization scales must be positive")
        self._validate_shapes()

    def _validate_shapes(self):
        shape: tuple[int, ...] = (self.history_length, self.features)
        shape = _chain(self.encoder, shape, "encoder")
        for head_name, head in (("force_head", self.force_head), ("torque_head", self.torque_head)):
            out = _chain(head, shape, head_name)
            if out != (3,):
                raise BundleFormatError(f"{head_name} must end in 3 outputs, got {out}")

    @property
    def layers(self) -> tuple[Layer, ...]:
        return self.encoder + self.force_head + self.torque_head

    @property
    def parameter_count(self) -> int:
        return sum(layer.parameter_count for layer in self.layers)


def _chain(layers: tuple[Layer, ...], shape: tuple[int, ...], where: str) -> tuple[int, ...]:
    for i, layer in enumerate(layers):
        tag = f"{where}[{i}]"
        if layer.kind == "flatten":
            shape = (int(np.prod(shape)),)
        elif layer.kind == "last-step":
            if len(shape) != 2:
                raise BundleFormatError(f"{tag}: last-step needs a (time, channels) input")
            shape = (shape[1],)
        elif layer.kind == "dense":
            if len(shape) != 1 or layer.weight.shape[1] != shape[0]:
                raise BundleFormatError(f"{tag}: dense weight {layer.weight.shape} does not chain from {shape}")
            shape = (layer.weight.shape[0],)
            if layer.bias.shape != shape:
                raise BundleFormatError(f"{tag}: bias shape {layer.bias.shape} != {shape}")
        elif layer.kind == "causal-conv1d":
            if len(shape) != 2 or layer.weight.shape[1] != shape[1]:
                raise BundleFormatError(f"{tag}: conv weight {layer.weight.shape} does not chain from {shape}")
            shape = (shape[0], layer.weight.shape[0])
            if layer.bias.shape != (layer.weight.shape[0],):
                raise BundleFormatError(f"{tag}: bias shape {layer.bias.shape} mismatches {layer.weight.shape[0]}")
    return shape


def _layer_to_dict(layer: Layer) -> dict:
    out = {"kind": layer.kind}
    if layer.weight is not None:
        out["shape"] = list(layer.weight.shape)
        out["weight"] = _encode(layer.weight)
        out["bias"] = _encode(layer.bias)
    if layer.kind == "causal-conv1d":
        out["dilation"] = int(layer.dilation)
    return out


def _layer_from_dict(data: dict) -> Layer:
    kind = data.get("kind")
    if kind in ("flatten", "last-step"):
        return Layer(kind=kind)
    shape = tuple(int(s) for s in data["shape"])
    weight = _decode(data["weight"], shape)
    bias = _decode(data["bias"], (shape[0],))
    return Layer(kind=kind, weight=weight, bias=bias, dilation=int(data.get("dilation", 1)))


def save_bundle(bundle: ResidualNetBundle, path: str | Path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "architecture": bundle.architecture,
        "history_length": bundle.history_length,
        "features": bundle.features,
        "activation": {"kind": "leaky_relu", "negative_slope": bundle.activation_slope},
        "input_mean": _encode(bundle.input_mean),
        "input_std": _encode(bundle.input_std),
        "output_std": _encode(bundle.output_std),
        "parameter_count": bundle.parameter_count,
        "encoder": [_layer_to_dict(l) for l in bundle.encoder],
        "force_head": [_layer_to_dict(l) for l in bundle.force_head],
        "torque_head": [_layer_to_dict(l) for l in bundle.torque_head],
    }
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n")


def load_bundle(path: str | Path) -> ResidualNetBundle:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise BundleFormatError(f"{path}: not valid JSON: {exc}") from exc
    if doc.get("format_version") != FORMAT_VERSION:
        raise BundleFormatError(f"unsupported format version {doc.get('format_version')}")
    features = int(doc.get("features", INPUT_FEATURES))
    history = int(doc.get("history_length", HISTORY_LENGTH))
    bundle = ResidualNetBundle(
        architecture=doc["architecture"],
        encoder=tuple(_layer_from_dict(d) for d in doc["encoder"]),
        force_head=tuple(_layer_from_dict(d) for d in doc["force_head"]),
        torque_head=tuple(_layer_from_dict(d) for d in doc["torque_head"]),
        input_mean=_decode(doc["input_mean"], (features,)),
        input_std=_decode(doc["input_std"], (features,)),
        output_std=_decode(doc["output_std"], (OUTPUTS,)),
        activation_slope=float(doc["activation"]["negative_slope"]),
        history_length=history,
        features=features,
    )
    declared = int(doc["parameter_count"])
    if declared != bundle.parameter_count:
        raise BundleFormatError(
            f"declared parameter count {declared} != actual {bundle.parameter_count}"
        )
    return bundle
