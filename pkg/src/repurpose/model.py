"""Layered model container and reference forward pass.

Weights are stored with shape ``(fan_in, fan_out)``: column ``i`` holds the
fan-in weights of output neuron ``i``, so a layer computes ``y = W.T @ x + b``
and passes ``x_next = activation(y)`` to the next layer.  All arithmetic is
float64 internally; the interchange format (see :mod:`repurpose.io`) stores
float32.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InputError

ACTIVATION_KINDS = ("identity", "relu", "tanh", "sigmoid")

_ACTIVATION_FNS = {
    "identity": lambda z: z,
    "relu": lambda z: np.maximum(z, 0.0),
    "tanh": np.tanh,
    # stable sigmoid: exp only ever sees non-positive arguments
    "sigmoid": lambda z: np.where(
        z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z)))
    ),
}


@dataclass(frozen=True)
class Activation:
    """A named scalar nonlinearity applied element-wise.

    All four supported kinds satisfy |f(u) - f(v)| <= |u - v|, which the
    output-error certificate relies on; ``lipschitz_one`` records that fact.
    """

    kind: str
    lipschitz_one: bool = True

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise InputError(f"unknown activation kind: {self.kind!r}")

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return _ACTIVATION_FNS[self.kind](z)


def as_tensor(data, shape=None) -> np.ndarray:
    """Coerce to a float64 array, rejecting NaN/Inf and shape mismatches."""
    arr = np.asarray(data, dtype=np.float64)
    if shape is not None and tuple(arr.shape) != tuple(shape):
        raise InputError(f"expected shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("tensor contains non-finite entries")
    return arr


@dataclass
class DenseLayer:
    weight: np.ndarray  # (fan_in, fan_out)
    bias: np.ndarray  # (fan_out,)
    activation: Activation

    def __post_init__(self):
        self.weight = as_tensor(self.weight)
        if self.weight.ndim != 2:
            raise InputError(f"dense weight must be 2-D, got shape {self.weight.shape}")
        self.bias = as_tensor(self.bias, shape=(self.weight.shape[1],))

    @property
    def fan_in(self) -> int:
        return self.weight.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weight.shape[1]


@dataclass
class ConvLayer:
    """Convolution kernel of shape (*spatial, c_in, c_out).

    Kernels exist so channel blocks can be reassigned and pruned; running the
    convolution itself is out of scope (a convolution is representable as a
    dense layer when execution is needed).
    """

    kernel: np.ndarray
    bias: np.ndarray  # (c_out,)
    activation: Activation

    def __post_init__(self):
        self.kernel = as_tensor(self.kernel)
        if self.kernel.ndim < 3:
            raise InputError("conv kernel needs at least one spatial axis plus (c_in, c_out)")
        if min(self.kernel.shape) < 1:
            raise InputError("conv kernel axes must all be >= 1")
        self.bias = as_tensor(self.bias, shape=(self.kernel.shape[-1],))

    @property
    def fan_in(self) -> int:
        return self.kernel.shape[-2]

    @property
    def fan_out(self) -> int:
        return self.kernel.shape[-1]


Layer = DenseLayer | ConvLayer


@dataclass
class SequentialModel:
    layers: list[Layer] = field(default_factory=list)

    def __post_init__(self):
        if not self.layers:
            raise InputError("model needs at least one layer")
        for i in range(1, len(self.layers)):
            prev, cur = self.layers[i - 1], self.layers[i]
            if prev.fan_out != cur.fan_in:
                raise DimensionMismatch(
                    f"layer {i}: fan_in {cur.fan_in} does not chain with "
                    f"layer {i - 1} fan_out {prev.fan_out}"
                )

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def input_width(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_width(self) -> int:
        return self.layers[-1].fan_out

    def widths(self) -> list[int]:
        """Neuron count at every layer boundary, input first (length L+1)."""
        return [self.input_width] + [layer.fan_out for layer in self.layers]


@dataclass
class ForwardTrace:
    """Per-layer signals captured by :func:`forward`.

    ``activations[0]`` is the input batch; ``activations[l]`` is the input to
    layer ``l+1``; ``preactivations[l]`` is the affine output of layer ``l+1``
    before its nonlinearity.
    """

    preactivations: list[np.ndarray]
    activations: list[np.ndarray]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


def forward(model: SequentialModel, X) -> ForwardTrace:
    """Run the reference forward pass on a batch of column vectors.

    ``X`` has shape (input_width, K).  Pure function: no state is retained
    between calls, so it is safe to invoke concurrently.
    """
    X = as_tensor(X)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError(f"input batch must be 2-D, got shape {X.shape}")
    pre, acts = [], [X]
    x = X
    for idx, layer in enumerate(model.layers):
        if not isinstance(layer, DenseLayer):
            raise InputError(f"layer {idx}: forward supports dense layers only")
        if x.shape[0] != layer.fan_in:
            raise DimensionMismatch(
                f"layer {idx}: expected {layer.fan_in} input rows, got {x.shape[0]}"
            )
        y = layer.weight.T @ x + layer.bias[:, None]
        x = layer.activation(y)
        pre.append(y)
        acts.append(x)
    return ForwardTrace(preactivations=pre, activations=acts)
