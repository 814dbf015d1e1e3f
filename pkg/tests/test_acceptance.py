"""Acceptance suite: one test per release criterion, tolerances pinned.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see them
live; they also appear in captured output on failure).  All models here are
synthetic or planted; nothing depends on the training harness.
"""

import itertools
import math
import time

import numpy as np

from repurpose import (
    Activation,
    DenseLayer,
    PartitionSpec,
    RepurposeConfig,
    SequentialModel,
    assign_neurons,
    brute_force_assign,
    build_mask,
    calibrate_eta2,
    column_cost,
    count_assignments,
    direct_sparsify,
    distributed_forward,
    error_certificate,
    forward,
    munkres,
    repurpose_model,
    shard_model,
    simulate,
    speedup_report,
    theoretical_comm_per_node,
    Workload,
    PlatformConfig,
)
from repurpose.partition import block_offsets, worker_of_index
from helpers import balanced_counts, max_relative_error, planted_scrambled_model, random_model


def report(ok: bool, label: str):
    print(f"{'PASS' if ok else 'FAIL'}  {label}")
    assert ok, label


# -- 1 -----------------------------------------------------------------------


def test_criterion_1_column_cost_oracle():
    """200 random columns x eta grid: closed-form cost == support enumeration."""
    rng = np.random.default_rng(1001)
    grid = (0.0, 0.01, 0.1, 1.0)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        length = int(rng.integers(1, 7))
        P = int(rng.integers(1, 4))
        cuts = np.sort(rng.integers(0, length + 1, size=P - 1))
        in_counts = np.diff(np.concatenate([[0], cuts, [length]])).tolist()
        owners = worker_of_index(in_counts)
        w = rng.normal(scale=float(rng.choice([0.05, 0.5, 2.0])), size=length)
        for eta1, eta2 in itertools.product(grid, grid):
            cfg = RepurposeConfig(eta1, eta2)
            for j in range(P):
                _, fast = column_cost(w, in_counts, j, cfg)
                best = np.inf
                for pattern in itertools.product((0.0, 1.0), repeat=length):
                    w_hat = w * np.asarray(pattern)
                    cand = (
                        float(np.sum((w - w_hat) ** 2))
                        + eta1 * np.count_nonzero(w_hat)
                        + eta2 * np.count_nonzero(w_hat[owners != j])
                    )
                    best = min(best, cand)
                worst = max(worst, abs(fast - best))
    elapsed = time.perf_counter() - start
    report(
        worst <= 1e-12 and elapsed < 5.0,
        f"criterion 1: column-cost oracle (worst gap {worst:.2e}, {elapsed:.2f}s < 5s)",
    )


# -- 2 -----------------------------------------------------------------------


def test_criterion_2_assignment_optimality():
    """100 instances (N<=8, P<=3, balanced): solver == exhaustive enumeration."""
    rng = np.random.default_rng(1002)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        P = int(rng.integers(2, 4))
        N = int(rng.integers(P, 9))
        in_dim = int(rng.integers(P, 9))
        W = rng.normal(size=(in_dim, N)) * float(rng.choice([0.3, 1.0]))
        cfg = RepurposeConfig(float(rng.choice([0.0, 0.05])), float(rng.choice([0.05, 0.5, 2.0])))
        in_counts = balanced_counts(in_dim, P)
        out_counts = balanced_counts(N, P)
        assert count_assignments(N, out_counts) <= 10**6
        fast = assign_neurons(W, in_counts, out_counts, cfg)
        slow = brute_force_assign(W, in_counts, out_counts, cfg)
        worst = max(worst, abs(fast.total_cost - slow.total_cost))
    elapsed = time.perf_counter() - start
    report(
        worst <= 1e-9 and elapsed < 30.0,
        f"criterion 2: assignment optimality (worst gap {worst:.2e}, {elapsed:.2f}s < 30s)",
    )


# -- 3 -----------------------------------------------------------------------


def test_criterion_3_exact_restructuring_equivalence():
    """Zero penalties: restructured output == permuted original output."""
    rng = np.random.default_rng(1003)
    worst = 0.0
    for _ in range(20):
        widths = [int(rng.integers(3, 10)) for _ in range(4)]
        model = random_model(rng, widths, kinds=("relu", "tanh", "sigmoid"))
        P = int(rng.integers(2, 4))
        spec = PartitionSpec.balanced(P, model.widths())
        rep = repurpose_model(model, spec, RepurposeConfig(0.0, 0.0))
        X = rng.normal(size=(widths[0], 6))
        got = forward(rep.model, X).output
        want = rep.output_permutation.apply_to_vector(forward(model, X).output)
        worst = max(worst, max_relative_error(got, want))
    report(worst <= 1e-12, f"criterion 3: exact equivalence at zero penalties (err {worst:.2e})")


# -- 4 -----------------------------------------------------------------------


def test_criterion_4_planted_recovery():
    """Scrambled block-diagonal models: full recovery, baseline pays energy."""
    rng = np.random.default_rng(1004)
    recovered = 0
    trials = 50
    for t in range(trials):
        P = int(rng.integers(2, 4))
        widths = [int(rng.integers(P, 65)) for _ in range(4)]
        model, spec, _ = planted_scrambled_model(rng, P=P, widths=widths)
        rep = repurpose_model(model, spec, RepurposeConfig(0.0, 0.25))
        ok = rep.cross_edges_after == [0, 0, 0] and rep.per_layer_deviation == [0.0, 0.0, 0.0]

        # baseline must spend exactly the cross-block energy to silence the wires
        eta2 = max(
            float(np.max((layer.weight * build_mask(spec.counts[l], spec.counts[l + 1])) ** 2))
            for l, layer in enumerate(model.layers)
        )
        base = direct_sparsify(model, spec, RepurposeConfig(0.0, eta2))
        energies = [
            float(np.sum((layer.weight * build_mask(spec.counts[l], spec.counts[l + 1])) ** 2))
            for l, layer in enumerate(model.layers)
        ]
        ok = ok and base.cross_edges_after == [0, 0, 0]
        ok = ok and all(
            abs(d * d - e) <= 1e-9 * max(1.0, e)
            for d, e in zip(base.per_layer_deviation, energies)
        )
        recovered += ok
    report(recovered == trials, f"criterion 4: planted recovery ({recovered}/{trials} trials)")


# -- 5 -----------------------------------------------------------------------


def test_criterion_5_certificate_dominance():
    """Calibrated 4-layer models: bound holds for every sample, every layer."""
    rng = np.random.default_rng(1005)
    trials = 50
    ok_all = True
    for _ in range(trials):
        widths = [int(rng.integers(4, 9)) for _ in range(5)]
        model = random_model(rng, widths, kinds=("relu", "tanh", "sigmoid", "identity"))
        spec = PartitionSpec.balanced(2, model.widths())
        cfg = calibrate_eta2(model, spec, eta1=0.0, epsilon=0.05)
        rep = repurpose_model(model, spec, cfg)
        probe = rng.normal(size=(widths[0], 20))
        cert = error_certificate(model, rep, probe)  # raises on violation
        ok_all = ok_all and cert.max_observed_error <= cert.bound

        trace = forward(model, probe)
        rep_trace = forward(rep.model, probe)
        q = cert.tau + cert.epsilon_sqrt
        prev = np.zeros(probe.shape[1])
        for l in range(model.num_layers):
            moved = rep.permutations[l + 1].apply_to_vector(trace.activations[l + 1])
            delta = np.linalg.norm(moved - rep_trace.activations[l + 1], axis=0)
            limit = q * prev + cert.epsilon_sqrt * cert.B
            ok_all = ok_all and bool(np.all(delta <= limit + 1e-9 * np.maximum(1.0, limit)))
            prev = delta
    report(ok_all, f"criterion 5: certified bound dominates measured error ({trials} models)")


# -- 6 -----------------------------------------------------------------------


def test_criterion_6_distributed_execution():
    """Sharded execution matches, and compressed cross-terms hit 0.275 N^2."""
    rng = np.random.default_rng(1006)
    worst = 0.0
    for _ in range(10):
        model = random_model(rng, [8, 12, 9, 5], kinds=("relu", "tanh"))
        P = int(rng.integers(2, 4))
        spec = PartitionSpec.balanced(P, model.widths())
        rep = repurpose_model(model, spec, RepurposeConfig(0.0, 0.1))
        X = rng.normal(size=(8, 5))
        run = distributed_forward(shard_model(rep, spec), X)
        worst = max(worst, max_relative_error(run.output, forward(rep.model, X).output))

    # one dense 512-wide layer, two workers, cross dependencies cut 10x
    N = 512
    half = N // 2
    omega_size = round(half / 10)  # 26 contributing source neurons per pair
    W = np.zeros((N, N))
    W[:half, :half] = rng.normal(size=(half, half))
    W[half:, half:] = rng.normal(size=(half, half))
    for rows, cols in (((0, half), (half, N)), ((half, N), (0, half))):
        picked = rng.choice(np.arange(rows[0], rows[1]), size=omega_size, replace=False)
        W[picked, cols[0] : cols[1]] = rng.normal(size=(omega_size, half))
    layer_model = SequentialModel([DenseLayer(W, np.zeros(N), Activation("identity"))])
    spec = PartitionSpec(workers=2, counts=[[half, half], [half, half]])
    run = distributed_forward(shard_model(layer_model, spec), rng.normal(size=(N, 1)))
    target = 0.275 * N * N
    mult_ok = all(abs(m - target) <= 0.01 * target for m in run.multiplies[0])
    report(
        worst <= 1e-9 and mult_ok,
        f"criterion 6: distributed execution (err {worst:.2e}; multiplies "
        f"{run.multiplies[0].tolist()} vs 0.275*N^2 = {target:.0f} +-1%)",
    )


# -- 7 -----------------------------------------------------------------------


def test_criterion_7_communication_formula():
    """Per-node payload: monotone in P, anchored at 16384 B, ratio 1.9375."""
    values = [theoretical_comm_per_node(8192, P, 0.0, 4) for P in range(2, 33)]
    monotone = all(a < b for a, b in zip(values, values[1:]))
    anchored = values[0] == 16384.0
    ratio = values[-1] / values[0] == 1.9375
    linear = all(
        theoretical_comm_per_node(8192, 8, s, 4)
        == theoretical_comm_per_node(8192, 8, 0.0, 4) * (1.0 - s)
        for s in (0.1, 0.25, 0.5, 0.75, 0.9, 0.99)
    )
    report(
        monotone and anchored and ratio and linear,
        "criterion 7: communication formula (D(2)=16384 B, D(32)/D(2)=1.9375, linear in 1-s)",
    )


# -- 8 -----------------------------------------------------------------------


def test_criterion_8_simulator_trends():
    """Speedup ordering, comm shares, and growth with model size."""
    dc = PlatformConfig.load("datacenter")
    edge = PlatformConfig.load("edge")
    flavors = (0.5, 0.75, 0.9, 0.99)
    ordering_ok = True
    share_ok = True
    for P in range(2, 33):
        for platform in (dc, edge):
            dense_total = simulate(platform, Workload(neurons=8192, nodes=P)).total
            speedups = [
                dense_total / simulate(platform, Workload(neurons=8192, nodes=P, sparsity=s)).total
                for s in flavors
            ]
            ordering_ok = ordering_ok and all(
                a < b for a, b in zip(speedups, speedups[1:])
            ) and speedups[0] > 1.0
        for s in (0.0,) + flavors:
            d = simulate(dc, Workload(neurons=8192, nodes=P, sparsity=s))
            e = simulate(edge, Workload(neurons=8192, nodes=P, sparsity=s))
            share_ok = share_ok and (e.comm_total / e.total > d.comm_total / d.total)
    # larger models shift more weight onto compute, which RePurpose cuts
    nodes = [24, 28, 32]
    growth = [
        speedup_report(dc, N, flavors=[0.9], node_counts=nodes)[0]["total_speedup"]
        for N in (1024, 8192, 65536)
    ]
    growth_ok = growth[0] < growth[1] < growth[2]
    report(
        ordering_ok and share_ok and growth_ok,
        f"criterion 8: simulator trends (RP ordering ok={ordering_ok}, "
        f"edge comm share ok={share_ok}, N-growth {['%.3f' % g for g in growth]})",
    )


# -- 9 -----------------------------------------------------------------------


def test_criterion_9_matching_correctness():
    """100 random 7x7 matrices vs factorial brute force, plus shift invariance."""
    rng = np.random.default_rng(1009)
    worst = 0.0
    invariant_ok = True
    for _ in range(100):
        C = rng.normal(size=(7, 7)) * 5.0
        pairs, total = munkres(C)
        best = min(
            sum(C[i, p[i]] for i in range(7)) for p in itertools.permutations(range(7))
        )
        worst = max(worst, abs(total - best))
        shifted = C.copy()
        shifted[int(rng.integers(7)), :] += float(rng.normal()) * 3.0
        shifted[:, int(rng.integers(7))] += float(rng.normal()) * 3.0
        pairs2, _ = munkres(shifted)
        invariant_ok = invariant_ok and pairs == pairs2
    report(
        worst <= 1e-9 and invariant_ok,
        f"criterion 9: matching equals factorial brute force (worst gap {worst:.2e}, "
        f"shift-invariant={invariant_ok})",
    )
