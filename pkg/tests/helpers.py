"""Shared construction helpers for the test suite.

The planted-model builder is the workhorse: it creates a model that is
block-diagonal by construction, then hides that structure behind random
neuron permutations (inputs stay put, matching the fixed input assignment).
Restructuring should recover an arrangement with zero cross edges and zero
deviation, which gives the tests a known ground truth.
"""

import numpy as np

from repurpose import Activation, DenseLayer, PartitionSpec, Permutation, SequentialModel
from repurpose.partition import block_offsets

ACT_KINDS = ("identity", "relu", "tanh", "sigmoid")


def random_model(rng, widths, kinds=None, scale=None):
    layers = []
    for l in range(len(widths) - 1):
        s = scale if scale is not None else 1.0 / np.sqrt(widths[l])
        W = rng.normal(size=(widths[l], widths[l + 1])) * s
        b = rng.normal(size=widths[l + 1]) * 0.1
        kind = (kinds or ACT_KINDS)[l % len(kinds or ACT_KINDS)]
        layers.append(DenseLayer(W, b, Activation(kind)))
    return SequentialModel(layers)


def balanced_counts(width, P):
    base, extra = divmod(width, P)
    return [base + (1 if k < extra else 0) for k in range(P)]


def planted_scrambled_model(rng, P, widths, kinds=None):
    """Return (scrambled model, partition spec, scramble permutations).

    Block-diagonal layers with dense random blocks are scrambled at every
    boundary except the input.  The scramble permutations map planted
    positions to scrambled positions.
    """
    counts = [balanced_counts(w, P) for w in widths]
    scrambles = [Permutation.identity(widths[0])]
    for w in widths[1:]:
        scrambles.append(Permutation(rng.permutation(w)))
    layers = []
    for l in range(len(widths) - 1):
        in_off = block_offsets(counts[l])
        out_off = block_offsets(counts[l + 1])
        W = np.zeros((widths[l], widths[l + 1]))
        for k in range(P):
            block = rng.normal(size=(in_off[k + 1] - in_off[k], out_off[k + 1] - out_off[k]))
            W[in_off[k] : in_off[k + 1], out_off[k] : out_off[k + 1]] = block
        b = rng.normal(size=widths[l + 1]) * 0.1
        # scatter planted positions to scrambled ones
        W = scrambles[l + 1].permute_cols(scrambles[l].permute_rows(W))
        b = scrambles[l + 1].apply_to_vector(b)
        kind = (kinds or ("relu", "tanh"))[l % 2]
        layers.append(DenseLayer(W, b, Activation(kind)))
    spec = PartitionSpec(workers=P, counts=counts)
    return SequentialModel(layers), spec, scrambles


def cross_energy(model, spec):
    """Total squared magnitude sitting on cross-worker positions, per layer."""
    from repurpose import build_mask

    energies = []
    for l, layer in enumerate(model.layers):
        mask = build_mask(spec.counts[l], spec.counts[l + 1])
        energies.append(float(np.sum((layer.weight * mask) ** 2)))
    return energies


def max_relative_error(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-30)
    return float(np.max(np.abs(a - b) / scale))
