"""Optimal neuron-to-worker assignment for a single layer.

The cost of placing output neuron i on worker j is the minimum of

    ||w_i - w_hat||^2 + eta1 * nnz(w_hat) + eta2 * nnz(w_hat outside j's block)

over all sparsified fan-in vectors w_hat.  That minimum is attained by
element-wise hard-thresholding: entry n is zeroed exactly when
w_n^2 <= eta1 (n inside worker j's input block) or w_n^2 <= eta1 + eta2
(outside), so each entry contributes min(w_n^2, threshold_n) to the cost.

Stacking these costs gives a P x N matrix; repeating worker k's row n_k times
turns the block-capacitated placement into a square assignment problem, which
a shortest-augmenting-path solver answers in O(N^3).  The row repetition is
virtual: the solver reads row r through a row -> worker map, so the cost data
stays O(PN).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationCapExceeded, InputError
from .partition import (
    Permutation,
    block_offsets,
    build_mask,
    worker_of_index,
)


@dataclass(frozen=True)
class RepurposeConfig:
    """Pruning penalties: eta1 taxes every kept weight, eta2 the cross-worker ones."""

    eta1: float = 0.0
    eta2: float = 0.0

    def __post_init__(self):
        if self.eta1 < 0 or self.eta2 < 0:
            raise InputError(f"penalties must be non-negative, got {self.eta1}, {self.eta2}")


@dataclass
class CostMatrix:
    """values[j, i] = cost of assigning output neuron i to worker j."""

    values: np.ndarray  # (P, N)
    expansion_counts: np.ndarray | None = None  # (n_1, ..., n_P), set when known


@dataclass
class AssignmentResult:
    permutation: Permutation
    total_cost: float
    per_neuron_cost: np.ndarray  # indexed by original neuron id


def _thresholds_for_worker(in_counts, j: int, cfg: RepurposeConfig) -> np.ndarray:
    """Per-entry squared pruning threshold seen from worker j."""
    if not 0 <= j < len(in_counts):
        raise InputError(f"worker index {j} out of range for {len(in_counts)} workers")
    owners = worker_of_index(in_counts)
    return np.where(owners == j, cfg.eta1, cfg.eta1 + cfg.eta2)


def column_cost(w_i, in_counts, j: int, cfg: RepurposeConfig):
    """Optimal sparsification of one fan-in column for worker j.

    Returns ``(w_hat, cost)``: the hard-thresholded column and the attained
    minimum.  Ties (w^2 == threshold) prune.
    """
    w = np.asarray(w_i, dtype=np.float64)
    if w.ndim != 1:
        raise InputError("column must be 1-D")
    if not 0 <= j < len(in_counts):
        raise InputError(f"worker index {j} out of range for {len(in_counts)} workers")
    if w.size != int(np.sum(in_counts)):
        raise InputError(f"column length {w.size} != sum of input counts {int(np.sum(in_counts))}")
    thresh = _thresholds_for_worker(in_counts, j, cfg)
    keep = w * w > thresh
    w_hat = np.where(keep, w, 0.0)
    owners = worker_of_index(in_counts)
    residual = float(np.sum((w - w_hat) ** 2))
    cost = (
        residual
        + cfg.eta1 * int(np.count_nonzero(w_hat))
        + cfg.eta2 * int(np.count_nonzero(w_hat[owners != j]))
    )
    return w_hat, float(cost)


def cost_values_from_squares(sq: np.ndarray, in_counts, cfg: RepurposeConfig) -> np.ndarray:
    """Cost matrix over precomputed squared magnitudes.

    Works for scalar weights (sq = W*W) and for whole convolution filters
    (sq = per-filter squared Frobenius norms): either way each element
    contributes min(square, threshold).
    """
    sq = np.asarray(sq, dtype=np.float64)
    if sq.ndim != 2:
        raise InputError("squared-magnitude matrix must be 2-D")
    if np.any(sq < 0):
        raise InputError("squared magnitudes must be non-negative")
    if sq.shape[0] != int(np.sum(in_counts)):
        raise InputError(f"rows {sq.shape[0]} != sum of input counts {int(np.sum(in_counts))}")
    P = len(in_counts)
    values = np.empty((P, sq.shape[1]), dtype=np.float64)
    for j in range(P):
        thresh = _thresholds_for_worker(in_counts, j, cfg)
        values[j] = np.minimum(sq, thresh[:, None]).sum(axis=0)
    return values


def build_cost_matrix(W, in_counts, cfg: RepurposeConfig, out_counts=None) -> CostMatrix:
    """Assignment costs for every (worker, output neuron) pair.

    Vectorized form of :func:`column_cost`: each entry contributes
    min(w^2, threshold) and the sum over a column is exactly the column's
    optimal cost.
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise InputError("weight matrix must be 2-D")
    values = cost_values_from_squares(W * W, in_counts, cfg)
    counts = None if out_counts is None else np.asarray(out_counts, dtype=np.int64)
    return CostMatrix(values=values, expansion_counts=counts)


def _solve_assignment(cost_rows: np.ndarray, row_map: np.ndarray) -> np.ndarray:
    """Min-cost perfect matching on the square matrix C[i, j] = cost_rows[row_map[i], j].

    Shortest-augmenting-path (Jonker-Volgenant style) with dual potentials,
    O(N^3).  Deterministic: rows are inserted in ascending order and column
    ties resolve to the lowest index, so equal-cost optima reproduce across
    runs and platforms.  Returns row_of_col: column j -> matched row index.
    """
    n = int(row_map.size)
    # 1-based arrays; index 0 is the virtual root column
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    row_of = np.zeros(n + 1, dtype=np.intp)  # column -> row (1-based; 0 = unmatched)
    prev_col = np.zeros(n + 1, dtype=np.intp)
    for i in range(1, n + 1):
        row_of[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = row_of[j0]
            cur = cost_rows[row_map[i0 - 1]] - u[i0] - v[1:]
            better = ~used[1:] & (cur < minv[1:])
            minv[1:][better] = cur[better]
            prev_col[1:][better] = j0
            reach = np.where(used[1:], np.inf, minv[1:])
            j0 = int(np.argmin(reach)) + 1
            delta = reach[j0 - 1]
            if not np.isfinite(delta):
                raise InputError("cost matrix contains non-finite entries")
            u[row_of[used]] += delta
            v[used] -= delta
            minv[1:][~used[1:]] -= delta
            if row_of[j0] == 0:
                break
        while j0 != 0:
            j1 = prev_col[j0]
            row_of[j0] = row_of[j1]
            j0 = j1
    return row_of[1:] - 1  # 0-based: column j -> row


def munkres(cost):
    """Minimum-cost perfect matching of a square cost matrix.

    Returns ``(pairs, total)`` where pairs is a list of (row, col) tuples
    sorted by row.
    """
    C = np.asarray(cost, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InputError(f"cost matrix must be square, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise InputError("cost matrix contains non-finite entries")
    n = C.shape[0]
    row_of_col = _solve_assignment(C, np.arange(n, dtype=np.intp))
    pairs = sorted((int(row_of_col[j]), j) for j in range(n))
    total = float(sum(C[r, c] for r, c in pairs))
    return pairs, total


def _positions_from_workers(worker_of: np.ndarray, out_counts) -> Permutation:
    """Canonical permutation for a worker assignment.

    Worker k's neurons occupy the k-th contiguous block, ordered by ascending
    original index; any intra-block order is equivalent, this one is
    reproducible.
    """
    offsets = block_offsets(out_counts)
    next_slot = offsets[:-1].copy()
    mapping = np.empty(worker_of.size, dtype=np.intp)
    for i in range(worker_of.size):
        k = worker_of[i]
        mapping[i] = next_slot[k]
        next_slot[k] += 1
    return Permutation(mapping)


def solve_cost_assignment(values: np.ndarray, out_counts) -> AssignmentResult:
    """Optimal capacity-respecting assignment for a prebuilt P x N cost matrix."""
    values = np.asarray(values, dtype=np.float64)
    out_counts = np.asarray(out_counts, dtype=np.int64)
    N = values.shape[1]
    if int(out_counts.sum()) != N:
        raise InputError(f"output counts {list(out_counts)} do not sum to {N}")
    if out_counts.size != values.shape[0]:
        raise InputError(f"cost matrix has {values.shape[0]} rows for {out_counts.size} workers")
    row_map = np.repeat(np.arange(out_counts.size, dtype=np.intp), out_counts)
    row_of_col = _solve_assignment(values, row_map)
    worker_of = row_map[row_of_col]  # neuron i -> worker
    permutation = _positions_from_workers(worker_of, out_counts)
    per_neuron = values[worker_of, np.arange(N)]
    return AssignmentResult(
        permutation=permutation,
        total_cost=float(per_neuron.sum()),
        per_neuron_cost=per_neuron,
    )


def assign_neurons(W, in_counts, out_counts, cfg: RepurposeConfig) -> AssignmentResult:
    """Jointly optimal neuron placement and pruning cost for one layer.

    Minimizes reconstruction error plus sparsity and cross-edge penalties over
    every permutation that gives worker k exactly out_counts[k] neurons.
    """
    W = np.asarray(W, dtype=np.float64)
    if len(out_counts) != len(in_counts):
        raise InputError("input and output count vectors must have the same length")
    cost = build_cost_matrix(W, in_counts, cfg, out_counts)
    return solve_cost_assignment(cost.values, out_counts)


def _enumerate_assignments(N: int, out_counts):
    """Yield every worker_of array that respects the block capacities."""
    counts = list(out_counts)

    def rec(remaining: tuple, k: int, worker_of: np.ndarray):
        if k == len(counts) - 1:
            worker_of[list(remaining)] = k
            yield worker_of
            return
        for chosen in itertools.combinations(remaining, counts[k]):
            worker_of[list(chosen)] = k
            rest = tuple(i for i in remaining if i not in chosen)
            yield from rec(rest, k + 1, worker_of)

    yield from rec(tuple(range(N)), 0, np.empty(N, dtype=np.intp))


def brute_force_assign(
    W, in_counts, out_counts, cfg: RepurposeConfig, cap: int = 1_000_000
) -> AssignmentResult:
    """Exhaustive optimality oracle for :func:`assign_neurons`.

    Enumerates every capacity-respecting assignment and evaluates the full
    objective directly on the permuted, hard-thresholded matrix; no code is
    shared with the cost-matrix fast path.
    """
    W = np.asarray(W, dtype=np.float64)
    N = W.shape[1]
    out_counts = np.asarray(out_counts, dtype=np.int64)
    if int(out_counts.sum()) != N:
        raise InputError(f"output counts {list(out_counts)} do not sum to {N}")
    n_assignments = count_assignments(N, out_counts)
    if n_assignments > cap:
        raise EnumerationCapExceeded(f"{n_assignments} assignments exceed cap {cap}")
    mask = build_mask(in_counts, out_counts)
    E = cfg.eta1 + cfg.eta2 * mask
    best_cost = np.inf
    best_worker_of = None
    for worker_of in _enumerate_assignments(N, out_counts):
        perm = _positions_from_workers(worker_of, out_counts)
        T = perm.permute_cols(W)  # W @ Pi.T
        W_hat = np.where(T * T <= E, 0.0, T)
        cost = (
            float(np.sum((W_hat - T) ** 2))
            + cfg.eta1 * int(np.count_nonzero(W_hat))
            + cfg.eta2 * int(np.count_nonzero((mask != 0) & (W_hat != 0)))
        )
        if cost < best_cost:
            best_cost = cost
            best_worker_of = worker_of.copy()
    permutation = _positions_from_workers(best_worker_of, out_counts)
    cost_matrix = build_cost_matrix(W, in_counts, cfg)
    per_neuron = cost_matrix.values[best_worker_of, np.arange(N)]
    return AssignmentResult(
        permutation=permutation,
        total_cost=float(best_cost),
        per_neuron_cost=per_neuron,
    )


def count_assignments(N: int, counts) -> int:
    """Exact number of capacity-respecting assignments (multinomial coefficient)."""
    counts = [int(c) for c in counts]
    if sum(counts) != N:
        raise InputError(f"counts {counts} do not sum to {N}")
    total = math.factorial(N)
    for c in counts:
        total //= math.factorial(c)
    return total


def asymptotic_estimate(N: int, P: int) -> float:
    """log of the balanced-assignment count growth rate, P**(N+0.5) * N**(1-P/2).

    Returned in log space; the raw value overflows float64 almost immediately.
    """
    if N < 1 or P < 1:
        raise InputError("N and P must be positive")
    return (N + 0.5) * math.log(P) + (1.0 - P / 2.0) * math.log(N)
