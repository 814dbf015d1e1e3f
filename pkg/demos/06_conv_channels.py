"""Channel-level restructuring of a convolution kernel.

Spatial positions cannot move, so the unit of work is the whole per-channel
filter: output channels are reassigned across workers and cross-worker
filters whose energy is below the threshold are zeroed as a block.
"""

import numpy as np

from repurpose import Activation, ConvLayer, RepurposeConfig, repurpose_conv

rng = np.random.default_rng(5)

c_in, c_out = 8, 8
# plant two channel groups: filters within a group are strong, across weak
kernel = np.zeros((3, 3, c_in, c_out))
group_of_in = rng.permutation(np.repeat([0, 1], c_in // 2))
group_of_out = rng.permutation(np.repeat([0, 1], c_out // 2))
for l in range(c_in):
    for i in range(c_out):
        strength = 1.0 if group_of_in[l] == group_of_out[i] else 0.05
        kernel[..., l, i] = rng.normal(scale=strength, size=(3, 3))

layer = ConvLayer(kernel, rng.normal(size=c_out), Activation("relu"))
# input channels arrive grouped by worker; mimic that by sorting the plant
order = np.argsort(group_of_in, kind="stable")
layer = ConvLayer(kernel[..., order, :], layer.bias, layer.activation)

pi, pruned, costs = repurpose_conv(layer, [4, 4], [4, 4], RepurposeConfig(0.0, 0.5))
print(f"output channel placement (old -> new position): {pi.map.tolist()}")
print(f"per-channel assignment cost: {np.round(costs, 4).tolist()}")

energies = np.sum(pruned.kernel**2, axis=(0, 1))
print("\nsurviving filter energy (rows = input channel, cols = output channel):")
for row in energies:
    print("  " + " ".join(f"{e:6.2f}" for e in row))
zeroed = int(np.sum(np.all(pruned.kernel == 0, axis=(0, 1))))
print(f"\nwhole filters zeroed: {zeroed} of {c_in * c_out}")
print(f"planted grouping of output channels: {group_of_out[np.argsort(pi.map)].tolist()}")
