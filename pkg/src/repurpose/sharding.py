"""Shard a model across logical workers and execute the distributed forward pass.

Each worker owns a contiguous block of neurons per boundary.  Its dense
diagonal block needs no communication; for every other worker it keeps a
compressed cross block: only the source neurons with at least one nonzero
outgoing weight into the destination block are retained (index set omega plus
the dense row slice).  The source worker then sends exactly |omega| scalars
per sample, which is also the count the communication log records.

Workers here are deterministic in-process loops, not OS processes: the point
is bit-exact equivalence checking and exact communication accounting, not
wall-clock time (see :mod:`repurpose.simulator` for timing).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .model import Activation, DenseLayer, SequentialModel, as_tensor, forward
from .partition import PartitionSpec, block_offsets
from .pipeline import RepurposedModel


@dataclass
class CrossBlock:
    omega: np.ndarray  # source-local indices of contributing neurons, ascending
    values: np.ndarray  # (|omega|, o_dst) dense slice


@dataclass
class ShardedLayer:
    diag: list[np.ndarray]  # per worker: (i_k, o_k)
    bias: list[np.ndarray]  # per worker: (o_k,)
    cross: dict  # (src, dst) -> CrossBlock, only pairs with |omega| > 0
    activation: Activation
    in_counts: list[int]
    out_counts: list[int]


@dataclass
class CommEvent:
    layer: int
    src: int
    dst: int
    values: int  # scalars per sample
    bytes: int


@dataclass
class CommLog:
    element_bytes: int = 4
    events: list[CommEvent] = field(default_factory=list)

    def record(self, layer: int, src: int, dst: int, values: int):
        self.events.append(
            CommEvent(layer, src, dst, values, values * self.element_bytes)
        )

    def total_values(self, layer: int | None = None) -> int:
        return sum(e.values for e in self.events if layer is None or e.layer == layer)

    def to_csv(self) -> str:
        lines = ["layer,src,dst,values,bytes"]
        lines += [f"{e.layer},{e.src},{e.dst},{e.values},{e.bytes}" for e in self.events]
        return "\n".join(lines) + "\n"


@dataclass
class ShardedModel:
    layers: list[ShardedLayer]
    workers: int

    def reassemble(self) -> SequentialModel:
        """Rebuild the full dense model; inverse of sharding, bit-exact."""
        rebuilt = []
        for sl in self.layers:
            in_off = block_offsets(sl.in_counts)
            out_off = block_offsets(sl.out_counts)
            W = np.zeros((int(in_off[-1]), int(out_off[-1])))
            b = np.zeros(int(out_off[-1]))
            for k in range(self.workers):
                W[in_off[k] : in_off[k + 1], out_off[k] : out_off[k + 1]] = sl.diag[k]
                b[out_off[k] : out_off[k + 1]] = sl.bias[k]
            for (src, dst), blk in sl.cross.items():
                rows = in_off[src] + blk.omega
                W[rows, out_off[dst] : out_off[dst + 1]] = blk.values
            rebuilt.append(DenseLayer(W, b, sl.activation))
        return SequentialModel(rebuilt)


@dataclass
class DistributedRun:
    worker_outputs: list[np.ndarray]
    comm_log: CommLog
    multiplies: np.ndarray  # (L, P) scalar multiplies per worker per layer, per sample

    @property
    def output(self) -> np.ndarray:
        return np.concatenate(self.worker_outputs, axis=0)


def shard_model(rep: RepurposedModel | SequentialModel, spec: PartitionSpec) -> ShardedModel:
    """Lossless block decomposition of a (restructured) model.

    Cross blocks keep only rows with a nonzero: pruning that empties a row
    removes it from the wire entirely.
    """
    model = rep.model if isinstance(rep, RepurposedModel) else rep
    spec.validate_model(model)
    layers = []
    for l, layer in enumerate(model.layers):
        if not isinstance(layer, DenseLayer):
            raise InputError(f"layer {l}: only dense layers can be sharded")
        in_counts = spec.counts[l]
        out_counts = spec.counts[l + 1]
        in_off = block_offsets(in_counts)
        out_off = block_offsets(out_counts)
        diag, bias, cross = [], [], {}
        for k in range(spec.workers):
            diag.append(layer.weight[in_off[k] : in_off[k + 1], out_off[k] : out_off[k + 1]].copy())
            bias.append(layer.bias[out_off[k] : out_off[k + 1]].copy())
        for dst in range(spec.workers):
            for src in range(spec.workers):
                if src == dst:
                    continue
                block = layer.weight[in_off[src] : in_off[src + 1], out_off[dst] : out_off[dst + 1]]
                omega = np.flatnonzero(np.any(block != 0, axis=1))
                if omega.size:
                    cross[(src, dst)] = CrossBlock(omega=omega, values=block[omega].copy())
        layers.append(
            ShardedLayer(
                diag=diag,
                bias=bias,
                cross=cross,
                activation=layer.activation,
                in_counts=list(in_counts),
                out_counts=list(out_counts),
            )
        )
    return ShardedModel(layers=layers, workers=spec.workers)


def _worker_layer(sl: ShardedLayer, k: int, xs: list[np.ndarray]):
    """One worker's computation for one layer; returns (activation, multiplies)."""
    y = sl.diag[k].T @ xs[k] + sl.bias[k][:, None]
    o_k = sl.diag[k].shape[1]
    mults = sl.diag[k].shape[0] * o_k
    for (src, dst), blk in sorted(sl.cross.items()):
        if dst != k:
            continue
        received = xs[src][blk.omega]  # the |omega| scalars on the wire
        y = y + blk.values.T @ received
        mults += blk.omega.size * o_k
    return sl.activation(y), mults


def distributed_forward(
    sharded: ShardedModel, X, element_bytes: int = 4, parallel: bool = False
) -> DistributedRun:
    """Execute the sharded model, logging exact per-pair communication.

    Communication counts are per sample (independent of batch width).  With
    ``parallel=True`` workers run on a thread pool with a barrier between
    layers; outputs are identical to the sequential schedule because each
    worker only reads the previous boundary's activations.
    """
    X = as_tensor(X)
    if X.ndim == 1:
        X = X[:, None]
    P = sharded.workers
    first = sharded.layers[0]
    if X.shape[0] != int(np.sum(first.in_counts)):
        raise InputError(
            f"input rows {X.shape[0]} != partitioned width {int(np.sum(first.in_counts))}"
        )
    off = block_offsets(first.in_counts)
    xs = [X[off[k] : off[k + 1]] for k in range(P)]
    log = CommLog(element_bytes=element_bytes)
    multiplies = np.zeros((len(sharded.layers), P), dtype=np.int64)
    for l, sl in enumerate(sharded.layers):
        for (src, dst), blk in sorted(sl.cross.items()):
            log.record(l, src, dst, int(blk.omega.size))
        if parallel:
            with ThreadPoolExecutor(max_workers=P) as pool:
                results = list(pool.map(lambda k: _worker_layer(sl, k, xs), range(P)))
        else:
            results = [_worker_layer(sl, k, xs) for k in range(P)]
        xs = [acts for acts, _ in results]
        multiplies[l] = [m for _, m in results]
    return DistributedRun(worker_outputs=xs, comm_log=log, multiplies=multiplies)


def equivalence_check(rep: RepurposedModel, spec: PartitionSpec, X) -> float:
    """Max relative error between distributed and monolithic outputs."""
    sharded = shard_model(rep, spec)
    run = distributed_forward(sharded, X)
    reference = forward(rep.model, X).output
    scale = np.maximum(np.abs(reference), 1.0)
    return float(np.max(np.abs(run.output - reference) / scale))
