"""RPM v1 model interchange format.

A model is a directory holding ``manifest.json`` plus one raw binary file per
tensor.  Tensor files are little-endian IEEE-754 float32, row-major, no
header; the byte length must equal ``4 * prod(shape)``.  Models loaded from
disk are promoted to float64 for computation.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .model import ACTIVATION_KINDS, Activation, ConvLayer, DenseLayer, SequentialModel

FORMAT_VERSION = 1
_DTYPE = np.dtype("<f4")


def _write_tensor(path: Path, values: np.ndarray) -> None:
    np.ascontiguousarray(values, dtype=_DTYPE).tofile(path)


def _read_tensor(path: Path, shape) -> np.ndarray:
    if not path.is_file():
        raise InputError(f"missing tensor file: {path}")
    expected = 4 * int(np.prod(shape))
    actual = path.stat().st_size
    if actual != expected:
        raise InputError(
            f"{path.name}: expected {expected} bytes for shape {tuple(shape)}, found {actual}"
        )
    data = np.fromfile(path, dtype=_DTYPE)
    return data.reshape(shape).astype(np.float64)


def save_model(model: SequentialModel, path) -> None:
    """Write ``model`` as an RPM v1 directory (created if needed)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for idx, layer in enumerate(model.layers):
        weight_file = f"layer{idx:02d}.weight.bin"
        bias_file = f"layer{idx:02d}.bias.bin"
        if isinstance(layer, DenseLayer):
            kind, tensor = "dense", layer.weight
        elif isinstance(layer, ConvLayer):
            kind, tensor = "conv", layer.kernel
        else:
            raise InputError(f"layer {idx}: unsupported layer type {type(layer).__name__}")
        _write_tensor(root / weight_file, tensor)
        _write_tensor(root / bias_file, layer.bias)
        entries.append(
            {
                "kind": kind,
                "in": layer.fan_in,
                "out": layer.fan_out,
                "activation": layer.activation.kind,
                "weight": weight_file,
                "bias": bias_file,
                "dtype": "f32",
                "layout": "row-major",
                "shape": [int(s) for s in tensor.shape],
            }
        )
    manifest = {"format_version": FORMAT_VERSION, "layers": entries}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2))


def load_model(path) -> SequentialModel:
    """Load an RPM v1 directory back into a :class:`SequentialModel`."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise InputError(f"missing manifest: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{manifest_path}: invalid JSON ({exc})") from exc

    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise InputError(f"unsupported format_version: {version!r} (expected {FORMAT_VERSION})")

    layers: list[DenseLayer | ConvLayer] = []
    for idx, entry in enumerate(manifest.get("layers", [])):
        kind = entry.get("kind")
        activation = entry.get("activation")
        if activation not in ACTIVATION_KINDS:
            raise InputError(f"layer {idx}: unknown activation kind {activation!r}")
        if entry.get("dtype") != "f32":
            raise InputError(f"layer {idx}: unsupported dtype {entry.get('dtype')!r}")
        shape = entry.get("shape")
        if not shape or any(int(s) <= 0 for s in shape):
            raise InputError(f"layer {idx}: bad tensor shape {shape!r}")
        weight = _read_tensor(root / entry["weight"], shape)
        bias = _read_tensor(root / entry["bias"], (int(entry["out"]),))
        act = Activation(activation)
        if kind == "dense":
            if len(shape) != 2 or shape != [entry["in"], entry["out"]]:
                raise InputError(f"layer {idx}: dense shape {shape} != [in, out]")
            layers.append(DenseLayer(weight, bias, act))
        elif kind == "conv":
            if len(shape) < 3 or shape[-2] != entry["in"] or shape[-1] != entry["out"]:
                raise InputError(f"layer {idx}: conv shape {shape} inconsistent with in/out")
            layers.append(ConvLayer(weight, bias, act))
        else:
            raise InputError(f"layer {idx}: unknown layer kind {kind!r}")
    if not layers:
        raise InputError("manifest declares no layers")
    return SequentialModel(layers)
