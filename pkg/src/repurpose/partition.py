"""Worker partitions, permutations, masks and cross-edge accounting.

A partition assigns each neuron at every layer boundary to one of P workers;
workers own contiguous index blocks, so a partition at one boundary is just a
count vector.  The binary mask marks the weight positions that connect
different workers' blocks: zero on the diagonal blocks, one elsewhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .model import DenseLayer, SequentialModel


def _check_counts(counts) -> np.ndarray:
    arr = np.asarray(counts, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"counts must be a non-empty 1-D sequence, got {counts!r}")
    if np.any(arr < 0):
        raise InputError(f"counts must be non-negative, got {list(arr)}")
    return arr


def block_offsets(counts) -> np.ndarray:
    """Start offset of each worker's contiguous block (length P+1)."""
    arr = _check_counts(counts)
    return np.concatenate([[0], np.cumsum(arr)])


def worker_of_index(counts) -> np.ndarray:
    """Map each neuron index to the worker that owns it."""
    arr = _check_counts(counts)
    return np.repeat(np.arange(arr.size), arr)


@dataclass
class PartitionSpec:
    """Per-boundary neuron counts for P workers.

    ``counts[0]`` fixes the input-layer assignment (e.g. which sensor owns
    which input); ``counts[l]`` gives the split after layer ``l``.
    """

    workers: int
    counts: list[list[int]]

    def __post_init__(self):
        if self.workers < 1:
            raise InputError(f"worker count must be >= 1, got {self.workers}")
        self.counts = [[int(c) for c in row] for row in self.counts]
        for b, row in enumerate(self.counts):
            if len(row) != self.workers:
                raise InputError(f"boundary {b}: expected {self.workers} counts, got {len(row)}")
            if any(c < 0 for c in row):
                raise InputError(f"boundary {b}: negative count in {row}")

    @property
    def num_boundaries(self) -> int:
        return len(self.counts)

    def widths(self) -> list[int]:
        return [int(sum(row)) for row in self.counts]

    def validate_model(self, model: SequentialModel) -> None:
        widths = model.widths()
        if len(self.counts) != len(widths):
            raise InputError(
                f"partition has {len(self.counts)} boundaries, model needs {len(widths)}"
            )
        for b, (row, width) in enumerate(zip(self.counts, widths)):
            if sum(row) != width:
                raise InputError(
                    f"boundary {b}: counts {row} sum to {sum(row)}, layer width is {width}"
                )

    @classmethod
    def balanced(cls, workers: int, widths) -> "PartitionSpec":
        """Split every boundary as evenly as possible (earlier workers get the remainder)."""
        counts = []
        for width in widths:
            base, extra = divmod(int(width), workers)
            counts.append([base + (1 if k < extra else 0) for k in range(workers)])
        return cls(workers=workers, counts=counts)

    def to_json(self) -> str:
        return json.dumps({"workers": self.workers, "counts": self.counts}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PartitionSpec":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"partition spec is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict) or "workers" not in obj or "counts" not in obj:
            raise InputError('partition spec needs {"workers": P, "counts": [[...]]}')
        return cls(workers=int(obj["workers"]), counts=obj["counts"])

    @classmethod
    def load(cls, path) -> "PartitionSpec":
        p = Path(path)
        if not p.is_file():
            raise InputError(f"missing partition spec: {p}")
        return cls.from_json(p.read_text())


@dataclass(frozen=True)
class Permutation:
    """A neuron rearrangement stored as an index array.

    ``map[i]`` is the new position of neuron ``i``.  Equivalently, the dense
    permutation matrix has a 1 at ``(map[i], i)``, so applying it to a vector
    scatters old entries to new positions.  Kept as indices: every matrix
    identity involving a permutation is realizable as a gather/scatter.
    """

    map: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.map, dtype=np.intp)
        if arr.ndim != 1:
            raise InputError("permutation map must be 1-D")
        if not np.array_equal(np.sort(arr), np.arange(arr.size)):
            raise InputError("permutation map is not a bijection")
        object.__setattr__(self, "map", arr)

    def __len__(self) -> int:
        return self.map.size

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.intp))

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.map, np.arange(self.map.size)))

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.map.size)
        return Permutation(inv)

    def apply_to_vector(self, x: np.ndarray) -> np.ndarray:
        """Return y with y[map[i]] = x[i] (rows of a batch move the same way)."""
        x = np.asarray(x)
        if x.shape[0] != self.map.size:
            raise InputError(f"vector length {x.shape[0]} != permutation size {self.map.size}")
        out = np.empty_like(x)
        out[self.map] = x
        return out

    def permute_rows(self, W: np.ndarray) -> np.ndarray:
        """Left-multiply by the permutation matrix: row i lands at map[i]."""
        return self.apply_to_vector(W)

    def permute_cols(self, W: np.ndarray) -> np.ndarray:
        """Right-multiply by the transposed matrix: column i lands at map[i]."""
        W = np.asarray(W)
        if W.shape[1] != self.map.size:
            raise InputError(f"column count {W.shape[1]} != permutation size {self.map.size}")
        out = np.empty_like(W)
        out[:, self.map] = W
        return out


def build_mask(in_counts, out_counts) -> np.ndarray:
    """Binary cross-worker mask for one layer.

    Entry (r, c) is 0 when input neuron r and output neuron c belong to the
    same worker's block and 1 otherwise, i.e. ones everywhere except the P
    diagonal blocks sized in_counts[k] x out_counts[k].
    """
    ic = _check_counts(in_counts)
    oc = _check_counts(out_counts)
    if ic.size != oc.size:
        raise InputError(f"count vectors differ in length: {ic.size} vs {oc.size}")
    mask = np.ones((int(ic.sum()), int(oc.sum())), dtype=np.float64)
    row_off = block_offsets(ic)
    col_off = block_offsets(oc)
    for k in range(ic.size):
        mask[row_off[k] : row_off[k + 1], col_off[k] : col_off[k + 1]] = 0.0
    return mask


def cross_edge_count(W: np.ndarray, mask: np.ndarray) -> int:
    """Number of nonzero weights sitting on cross-worker positions.

    "Nonzero" means exactly != 0.0: pruned matrices contain literal zeros by
    construction, so no epsilon is involved.
    """
    W = np.asarray(W)
    mask = np.asarray(mask)
    if W.shape != mask.shape:
        raise InputError(f"weight shape {W.shape} != mask shape {mask.shape}")
    return int(np.count_nonzero((mask != 0) & (W != 0)))


def apply_permutation(layer: DenseLayer, pi_prev: Permutation, pi: Permutation) -> DenseLayer:
    """Rearrange a dense layer's inputs by ``pi_prev`` and outputs by ``pi``.

    Pure index shuffling (weights become pi_prev @ W @ pi.T, bias pi @ b); no
    floating-point arithmetic touches the values.
    """
    if len(pi_prev) != layer.fan_in:
        raise InputError(f"input permutation size {len(pi_prev)} != fan_in {layer.fan_in}")
    if len(pi) != layer.fan_out:
        raise InputError(f"output permutation size {len(pi)} != fan_out {layer.fan_out}")
    weight = pi.permute_cols(pi_prev.permute_rows(layer.weight))
    bias = pi.apply_to_vector(layer.bias)
    return DenseLayer(weight, bias, layer.activation)
