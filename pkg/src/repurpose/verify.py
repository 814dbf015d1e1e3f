"""Built-in oracle suites: slow exhaustive checks against the fast paths.

Each verifier draws seeded random instances, answers the same question with
an independent method (support enumeration, assignment enumeration, replayed
bounds, monolithic execution) and raises VerificationError on the first
disagreement, naming the instance.  These power ``repurpose verify`` and
exist so a build can distrust itself cheaply.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import assignment as asg
from . import pipeline, sharding
from .assignment import RepurposeConfig
from .errors import CertificateError, VerificationError
from .model import Activation, DenseLayer, SequentialModel, forward
from .partition import PartitionSpec, worker_of_index

ETA_GRID = (0.0, 0.01, 0.1, 1.0)


def _support_pattern_minimum(w: np.ndarray, in_counts, j: int, cfg: RepurposeConfig) -> float:
    """Cheapest sparsification by trying all 2^len keep/drop patterns."""
    owners = worker_of_index(in_counts)
    best = np.inf
    for pattern in itertools.product((False, True), repeat=w.size):
        keep = np.asarray(pattern)
        w_hat = np.where(keep, w, 0.0)
        cost = (
            float(np.sum((w - w_hat) ** 2))
            + cfg.eta1 * np.count_nonzero(w_hat)
            + cfg.eta2 * np.count_nonzero(w_hat[owners != j])
        )
        best = min(best, cost)
    return best


def verify_column_costs(trials: int, seed: int, quiet: bool = True) -> int:
    """Fast per-column cost vs exhaustive support enumeration, exact match."""
    rng = np.random.default_rng(seed)
    checked = 0
    for t in range(trials):
        length = int(rng.integers(1, 7))
        P = int(rng.integers(1, min(3, length) + 1))
        if P == 1:
            in_counts = [length]
        else:
            splits = np.sort(rng.choice(np.arange(1, length), size=P - 1, replace=False))
            in_counts = np.diff(np.concatenate([[0], splits, [length]])).tolist()
        w = rng.normal(scale=rng.choice([0.05, 0.5, 2.0]), size=length)
        for eta1 in ETA_GRID:
            for eta2 in ETA_GRID:
                cfg = RepurposeConfig(eta1, eta2)
                for j in range(P):
                    _, fast = asg.column_cost(w, in_counts, j, cfg)
                    slow = _support_pattern_minimum(w, in_counts, j, cfg)
                    if abs(fast - slow) > 1e-12:
                        raise VerificationError(
                            f"column cost mismatch: trial {t} w={w.tolist()} "
                            f"in_counts={in_counts} j={j} eta=({eta1},{eta2}) "
                            f"fast={fast!r} enumerated={slow!r}"
                        )
                    checked += 1
    if not quiet:
        print(f"column-cost oracle: {checked} comparisons OK")
    return checked


def _random_instance(rng):
    N = int(rng.integers(2, 9))
    P = int(rng.integers(2, 4))
    in_dim = int(rng.integers(P, 9))
    base, extra = divmod(N, P)
    out_counts = [base + (1 if k < extra else 0) for k in range(P)]
    base_i, extra_i = divmod(in_dim, P)
    in_counts = [base_i + (1 if k < extra_i else 0) for k in range(P)]
    W = rng.normal(size=(in_dim, N))
    eta1 = float(rng.choice([0.0, 0.01, 0.1]))
    eta2 = float(rng.choice([0.01, 0.1, 1.0]))
    return W, in_counts, out_counts, RepurposeConfig(eta1, eta2)


def verify_assignment(trials: int, seed: int, quiet: bool = True) -> int:
    """Polynomial-time assignment vs exhaustive enumeration (objective value)."""
    rng = np.random.default_rng(seed)
    for t in range(trials):
        W, in_counts, out_counts, cfg = _random_instance(rng)
        fast = asg.assign_neurons(W, in_counts, out_counts, cfg)
        slow = asg.brute_force_assign(W, in_counts, out_counts, cfg)
        if abs(fast.total_cost - slow.total_cost) > 1e-9:
            raise VerificationError(
                f"assignment mismatch: trial {t} W shape {W.shape} "
                f"counts {in_counts}/{out_counts} eta=({cfg.eta1},{cfg.eta2}) "
                f"fast={fast.total_cost!r} enumerated={slow.total_cost!r}"
            )
    if not quiet:
        print(f"assignment oracle: {trials} instances OK")
    return trials


def _random_lipschitz_model(rng, layers: int = 4) -> SequentialModel:
    widths = [int(rng.integers(4, 10)) for _ in range(layers + 1)]
    kinds = ["relu", "tanh", "sigmoid", "identity"]
    out = []
    for l in range(layers):
        W = rng.normal(size=(widths[l], widths[l + 1])) / np.sqrt(widths[l])
        b = rng.normal(size=widths[l + 1]) * 0.1
        out.append(DenseLayer(W, b, Activation(str(rng.choice(kinds)))))
    return SequentialModel(out)


def verify_bound(trials: int, seed: int, quiet: bool = True) -> int:
    """Certified output bound dominates the measured deviation on fresh probes."""
    rng = np.random.default_rng(seed)
    for t in range(trials):
        model = _random_lipschitz_model(rng)
        spec = PartitionSpec.balanced(2, model.widths())
        cfg = pipeline.calibrate_eta2(model, spec, eta1=0.0, epsilon=0.05)
        rep = pipeline.repurpose_model(model, spec, cfg)
        probe = rng.normal(size=(model.input_width, 16))
        try:
            cert = pipeline.error_certificate(model, rep, probe)
        except CertificateError as exc:
            raise VerificationError(f"bound violated: trial {t}: {exc}") from exc
        if not cert.assumptions_ok:
            raise VerificationError(f"certificate assumptions failed on trial {t}")
    if not quiet:
        print(f"bound oracle: {trials} models OK")
    return trials


def verify_exec(trials: int, seed: int, quiet: bool = True) -> int:
    """Distributed execution matches the monolithic forward pass."""
    rng = np.random.default_rng(seed)
    for t in range(trials):
        model = _random_lipschitz_model(rng, layers=3)
        P = int(rng.integers(2, 4))
        spec = PartitionSpec.balanced(P, model.widths())
        rep = pipeline.repurpose_model(model, spec, RepurposeConfig(0.0, 0.05))
        X = rng.normal(size=(model.input_width, 8))
        err = sharding.equivalence_check(rep, spec, X)
        if err > 1e-9:
            raise VerificationError(
                f"execution mismatch: trial {t} P={P} max relative error {err!r}"
            )
        rebuilt = sharding.shard_model(rep, spec).reassemble()
        for l, (a, b) in enumerate(zip(rebuilt.layers, rep.model.layers)):
            if not (np.array_equal(a.weight, b.weight) and np.array_equal(a.bias, b.bias)):
                raise VerificationError(f"reassembly mismatch: trial {t} layer {l}")
    if not quiet:
        print(f"execution oracle: {trials} models OK")
    return trials


VERIFIERS = {
    "cost": verify_column_costs,
    "assignment": verify_assignment,
    "bound": verify_bound,
    "exec": verify_exec,
}


def run(mode: str, trials: int, seed: int, quiet: bool = True) -> int:
    if mode not in VERIFIERS:
        raise VerificationError(f"unknown verify mode {mode!r}; pick from {sorted(VERIFIERS)}")
    return VERIFIERS[mode](trials, seed, quiet=quiet)
