"""Layer-wise restructuring of a whole model.

One pass over the layers: carry the previous boundary's permutation into the
layer, pick the optimal output-neuron placement, hard-threshold the permuted
weights against the per-position threshold matrix ``eta1 + eta2 * mask``, and
permute the bias.  Also provides the no-permutation sparsification baseline,
threshold calibration against a deviation budget, the convolutional channel
variant, and the output-error certificate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .assignment import (
    AssignmentResult,
    RepurposeConfig,
    assign_neurons,
    cost_values_from_squares,
    solve_cost_assignment,
)
from .errors import CertificateError, InfeasibleError, InputError
from .io import load_model, save_model
from .model import ConvLayer, DenseLayer, SequentialModel, as_tensor, forward
from .partition import (
    PartitionSpec,
    Permutation,
    build_mask,
    cross_edge_count,
    worker_of_index,
)


def hard_threshold_matrix(T, E) -> np.ndarray:
    """Zero every entry whose square is <= its threshold; keep the rest bitwise.

    ``E`` holds squared magnitudes, so ties prune.  Survivors are copied
    unchanged: restructuring never modifies a weight it keeps.
    """
    T = np.asarray(T, dtype=np.float64)
    E = np.asarray(E, dtype=np.float64)
    if T.shape != E.shape:
        raise InputError(f"threshold shape {E.shape} != matrix shape {T.shape}")
    if np.any(E < 0):
        raise InputError("thresholds must be non-negative")
    return np.where(T * T <= E, 0.0, T)


@dataclass
class RepurposedModel:
    """A restructured model plus the bookkeeping needed to audit it."""

    model: SequentialModel
    permutations: list[Permutation]  # one per boundary; permutations[0] is identity
    per_layer_deviation: list[float]  # Frobenius norm of what pruning removed
    cross_edges_before: list[int]  # ||M . W||_0 of the original arrangement
    cross_edges_after: list[int]  # ||M . W_hat||_0 after permute + prune
    eta1: float
    eta2: float

    @property
    def output_permutation(self) -> Permutation:
        return self.permutations[-1]


@dataclass
class ErrorCertificate:
    """Worst-case output deviation bound between original and restructured model.

    tau bounds every layer's weight Frobenius norm, B the layer-input signal
    norms over the probe batch, epsilon_sqrt the per-layer parameter
    deviation.  The bound is conditional on inputs resembling the probe batch:
    B is measured, not proven.
    """

    tau: float
    B: float
    epsilon_sqrt: float
    bound: float
    assumptions_ok: bool
    max_observed_error: float

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "B": self.B,
            "epsilon": self.epsilon_sqrt,
            "bound": self.bound,
        }


def _restructure(
    model: SequentialModel,
    spec: PartitionSpec,
    cfg: RepurposeConfig,
    optimize_permutation: bool,
    permute_output: bool,
) -> RepurposedModel:
    spec.validate_model(model)
    for idx, layer in enumerate(model.layers):
        if not isinstance(layer, DenseLayer):
            raise InputError(
                f"layer {idx}: only dense layers are restructured here; "
                "use repurpose_conv for convolution kernels"
            )
    L = model.num_layers
    pi_prev = Permutation.identity(model.input_width)
    permutations = [pi_prev]
    new_layers: list[DenseLayer] = []
    deviations: list[float] = []
    cross_before: list[int] = []
    cross_after: list[int] = []
    for l, layer in enumerate(model.layers):
        in_counts = spec.counts[l]
        out_counts = spec.counts[l + 1]
        mask = build_mask(in_counts, out_counts)
        cross_before.append(cross_edge_count(layer.weight, mask))
        T = pi_prev.permute_rows(layer.weight)
        if optimize_permutation and (permute_output or l < L - 1):
            result: AssignmentResult = assign_neurons(T, in_counts, out_counts, cfg)
            pi = result.permutation
        else:
            pi = Permutation.identity(layer.fan_out)
        arranged = pi.permute_cols(T)
        W_hat = hard_threshold_matrix(arranged, cfg.eta1 + cfg.eta2 * mask)
        b_hat = pi.apply_to_vector(layer.bias)
        deviations.append(float(np.linalg.norm(W_hat - arranged)))
        cross_after.append(cross_edge_count(W_hat, mask))
        new_layers.append(DenseLayer(W_hat, b_hat, layer.activation))
        permutations.append(pi)
        pi_prev = pi
    return RepurposedModel(
        model=SequentialModel(new_layers),
        permutations=permutations,
        per_layer_deviation=deviations,
        cross_edges_before=cross_before,
        cross_edges_after=cross_after,
        eta1=cfg.eta1,
        eta2=cfg.eta2,
    )


def repurpose_model(
    model: SequentialModel,
    spec: PartitionSpec,
    cfg: RepurposeConfig,
    permute_output: bool = True,
) -> RepurposedModel:
    """Permute and prune every layer for the given worker partition.

    With ``permute_output=False`` the final layer keeps its original neuron
    order (it is still pruned); consumers that need a fixed output layout can
    then skip un-permuting, at the price of a possibly worse final layer.
    """
    return _restructure(model, spec, cfg, optimize_permutation=True, permute_output=permute_output)


def direct_sparsify(
    model: SequentialModel, spec: PartitionSpec, cfg: RepurposeConfig
) -> RepurposedModel:
    """Baseline: prune cross-worker weights without rearranging any neurons."""
    return _restructure(model, spec, cfg, optimize_permutation=False, permute_output=False)


def calibrate_eta2(
    model: SequentialModel,
    spec: PartitionSpec,
    eta1: float,
    epsilon: float,
    rel_tol: float = 1e-3,
    permute_output: bool = True,
) -> RepurposeConfig:
    """Largest cross-edge penalty whose pruning stays inside the deviation budget.

    Feasibility means every layer's squared deviation ||W_hat - T Pi^T||_F^2
    is at most ``epsilon``.  Deviation grows with eta2, so bisection over
    [0, max |W|^2] converges; the result is within relative ``rel_tol`` of the
    feasibility boundary.
    """
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")

    def feasible(eta2: float) -> bool:
        rep = repurpose_model(
            model, spec, RepurposeConfig(eta1, eta2), permute_output=permute_output
        )
        return all(d * d <= epsilon for d in rep.per_layer_deviation)

    if not feasible(0.0):
        raise InfeasibleError(
            f"deviation budget {epsilon} is violated already at eta2=0 (eta1={eta1})"
        )
    hi = max(float(np.max(layer.weight**2)) for layer in model.layers)
    if hi == 0.0 or feasible(hi):
        return RepurposeConfig(eta1, hi)
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return RepurposeConfig(eta1, lo)


def repurpose_conv(
    layer: ConvLayer, in_channel_counts, out_channel_counts, cfg: RepurposeConfig
):
    """Channel-level restructuring of a convolution kernel.

    Spatial positions cannot move, so whole per-channel filters are the unit
    of pruning: filter (l, i) is zeroed when its squared Frobenius norm is at
    most eta1 (input channel l on the same worker as output channel i) or
    eta1 + eta2 (cross-worker).  Output channels are then reassigned with the
    same solver used for dense layers, operating on filter energies.

    Returns ``(permutation, pruned_layer, per_channel_cost)``.
    """
    kernel = as_tensor(layer.kernel)
    c_in, c_out = kernel.shape[-2], kernel.shape[-1]
    if int(np.sum(in_channel_counts)) != c_in:
        raise InputError(f"input channel counts do not sum to {c_in}")
    if int(np.sum(out_channel_counts)) != c_out:
        raise InputError(f"output channel counts do not sum to {c_out}")
    spatial_axes = tuple(range(kernel.ndim - 2))
    energies = np.sum(kernel * kernel, axis=spatial_axes)  # (c_in, c_out)
    # filter energies play the role of squared weights in the dense solver
    values = cost_values_from_squares(energies, in_channel_counts, cfg)
    result = solve_cost_assignment(values, out_channel_counts)
    pi = result.permutation
    owners_in = worker_of_index(in_channel_counts)
    owners_out = worker_of_index(out_channel_counts)
    new_kernel = np.zeros_like(kernel)
    for i in range(c_out):
        dest = pi.map[i]
        worker = owners_out[dest]
        thresh = np.where(owners_in == worker, cfg.eta1, cfg.eta1 + cfg.eta2)
        keep = energies[:, i] > thresh  # whole filters survive or vanish
        new_kernel[..., :, dest] = np.where(keep, kernel[..., :, i], 0.0)
    new_bias = pi.apply_to_vector(layer.bias)
    pruned = ConvLayer(new_kernel, new_bias, layer.activation)
    return pi, pruned, result.per_neuron_cost


def error_certificate(
    original: SequentialModel, repurposed: RepurposedModel, probe
) -> ErrorCertificate:
    """Certify the output deviation of the restructured model on a probe batch.

    Requires every activation to be 1-Lipschitz; refuses otherwise.  The
    certificate also replays both models on the probe and checks that the
    measured deviation never exceeds the bound (it cannot, unless the
    restructuring bookkeeping is broken, in which case CertificateError).
    """
    for idx, layer in enumerate(original.layers):
        if not layer.activation.lipschitz_one:
            raise CertificateError(
                f"layer {idx}: activation {layer.activation.kind!r} is not 1-Lipschitz"
            )
    probe = as_tensor(probe)
    if probe.ndim == 1:
        probe = probe[:, None]
    if probe.shape[1] == 0:
        raise InputError("probe batch is empty")
    L = original.num_layers
    tau = max(float(np.linalg.norm(layer.weight)) for layer in original.layers)
    eps = max(repurposed.per_layer_deviation)
    trace = forward(original, probe)
    # signal bound over the inputs of layers 1..L (not the final output)
    B = max(float(np.max(np.linalg.norm(trace.activations[l], axis=0))) for l in range(L))
    q = tau + eps
    if q == 1.0:
        geometric = float(L)
    else:
        geometric = (q**L - 1.0) / (q - 1.0)
    bound = eps * geometric * B
    rep_trace = forward(repurposed.model, probe)
    final_perm = repurposed.output_permutation
    measured = np.linalg.norm(
        rep_trace.output - final_perm.apply_to_vector(trace.output), axis=0
    )
    max_observed = float(np.max(measured))
    assumptions_ok = bool(np.isfinite(tau) and np.isfinite(B))
    if max_observed > bound:
        raise CertificateError(
            f"measured deviation {max_observed:.6g} exceeds certified bound {bound:.6g}"
        )
    return ErrorCertificate(
        tau=tau,
        B=B,
        epsilon_sqrt=eps,
        bound=bound,
        assumptions_ok=assumptions_ok,
        max_observed_error=max_observed,
    )


def save_repurposed(rep: RepurposedModel, path, certificate: ErrorCertificate | None = None):
    """Write the restructured model as RPM v1 plus a repurpose.json sidecar."""
    root = Path(path)
    save_model(rep.model, root)
    payload = {
        "permutations": [perm.map.tolist() for perm in rep.permutations],
        "per_layer_deviation": rep.per_layer_deviation,
        "cross_edges_before": rep.cross_edges_before,
        "cross_edges_after": rep.cross_edges_after,
        "eta1": rep.eta1,
        "eta2": rep.eta2,
    }
    if certificate is not None:
        payload["certificate"] = certificate.to_dict()
    (root / "repurpose.json").write_text(json.dumps(payload, indent=2))


def load_repurposed(path) -> RepurposedModel:
    """Read back a model saved by :func:`save_repurposed`."""
    root = Path(path)
    sidecar = root / "repurpose.json"
    if not sidecar.is_file():
        raise InputError(f"missing repurpose.json in {root}")
    payload = json.loads(sidecar.read_text())
    model = load_model(root)
    return RepurposedModel(
        model=model,
        permutations=[Permutation(np.asarray(m, dtype=np.intp)) for m in payload["permutations"]],
        per_layer_deviation=[float(d) for d in payload["per_layer_deviation"]],
        cross_edges_before=[int(c) for c in payload["cross_edges_before"]],
        cross_edges_after=[int(c) for c in payload["cross_edges_after"]],
        eta1=float(payload["eta1"]),
        eta2=float(payload["eta2"]),
    )
