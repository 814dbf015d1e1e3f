import json

import numpy as np
import pytest

from repurpose import PartitionSpec, RepurposeConfig, load_repurposed, save_model
from repurpose.cli import main
from helpers import planted_scrambled_model, random_model


@pytest.fixture
def model_dir(tmp_path):
    rng = np.random.default_rng(31)
    model = random_model(rng, [4, 6, 4], scale=1.0)
    save_model(model, tmp_path / "model")
    spec = PartitionSpec.balanced(2, model.widths())
    (tmp_path / "partition.json").write_text(spec.to_json())
    return tmp_path


def test_repurpose_zero_etas(model_dir, capsys):
    rc = main(
        [
            "repurpose",
            str(model_dir / "model"),
            "--partition",
            str(model_dir / "partition.json"),
            "--eta2",
            "0",
            "--out",
            str(model_dir / "out"),
        ]
    )
    assert rc == 0
    sidecar = json.loads((model_dir / "out" / "repurpose.json").read_text())
    assert sidecar["per_layer_deviation"] == [0.0, 0.0]
    assert all(
        a <= b
        for a, b in zip(sidecar["cross_edges_after"], sidecar["cross_edges_before"])
    )
    assert set(sidecar["certificate"]) == {"tau", "B", "epsilon", "bound"}


def test_repurpose_epsilon_budget(model_dir):
    rc = main(
        [
            "repurpose",
            str(model_dir / "model"),
            "--partition",
            str(model_dir / "partition.json"),
            "--epsilon",
            "0.02",
            "--out",
            str(model_dir / "out"),
            "--quiet",
        ]
    )
    assert rc == 0
    rep = load_repurposed(model_dir / "out")
    assert all(d * d <= 0.02 for d in rep.per_layer_deviation)


def test_repurpose_requires_exactly_one_knob(model_dir):
    args = ["repurpose", str(model_dir / "model"), "--partition", str(model_dir / "partition.json")]
    assert main(args) == 2
    assert main(args + ["--eta2", "0.1", "--epsilon", "0.1"]) == 2


def test_missing_tensor_file_exits_2(model_dir, capsys):
    (model_dir / "model" / "layer00.bias.bin").unlink()
    rc = main(
        [
            "repurpose",
            str(model_dir / "model"),
            "--partition",
            str(model_dir / "partition.json"),
            "--eta2",
            "0",
        ]
    )
    assert rc == 2
    assert "layer00.bias.bin" in capsys.readouterr().err


def test_infeasible_budget_exits_3(model_dir):
    rc = main(
        [
            "repurpose",
            str(model_dir / "model"),
            "--partition",
            str(model_dir / "partition.json"),
            "--eta1",
            "0.5",
            "--epsilon",
            "1e-12",
            "--quiet",
        ]
    )
    assert rc == 3


def test_sparsify_smoke(model_dir):
    rc = main(
        [
            "sparsify",
            str(model_dir / "model"),
            "--partition",
            str(model_dir / "partition.json"),
            "--eta2",
            "0.05",
            "--out",
            str(model_dir / "sparse"),
            "--quiet",
        ]
    )
    assert rc == 0
    rep = load_repurposed(model_dir / "sparse")
    assert all(list(p.map) == sorted(p.map) for p in rep.permutations)


def test_verify_subcommands_pass():
    assert main(["verify", "cost", "--trials", "10", "--seed", "7", "--quiet"]) == 0
    assert main(["verify", "assignment", "--trials", "10", "--seed", "7", "--quiet"]) == 0
    assert main(["verify", "bound", "--trials", "3", "--seed", "7", "--quiet"]) == 0
    assert main(["verify", "exec", "--trials", "3", "--seed", "7", "--quiet"]) == 0


def test_verify_mutation_canary(monkeypatch):
    # flip the threshold comparison inside the fast path: keep small entries,
    # prune large ones; the enumeration oracle must catch it
    from repurpose import assignment as asg_module
    from repurpose.partition import worker_of_index

    real = asg_module.column_cost

    def flipped(w_i, in_counts, j, cfg):
        w = np.asarray(w_i, dtype=np.float64)
        owners = worker_of_index(in_counts)
        thresh = np.where(owners == j, cfg.eta1, cfg.eta1 + cfg.eta2)
        keep = w * w <= thresh  # inverted comparison
        w_hat = np.where(keep, w, 0.0)
        cost = (
            float(np.sum((w - w_hat) ** 2))
            + cfg.eta1 * int(np.count_nonzero(w_hat))
            + cfg.eta2 * int(np.count_nonzero(w_hat[owners != j]))
        )
        return w_hat, cost

    monkeypatch.setattr(asg_module, "column_cost", flipped)
    assert main(["verify", "cost", "--trials", "20", "--seed", "3", "--quiet"]) == 1
    monkeypatch.setattr(asg_module, "column_cost", real)
    assert main(["verify", "cost", "--trials", "20", "--seed", "3", "--quiet"]) == 0


def test_simulate_smoke(tmp_path, capsys):
    rc = main(
        [
            "simulate",
            "--platform",
            "edge",
            "--neurons",
            "8192",
            "--nodes",
            "8",
            "--sparsity",
            "0.9",
            "--out",
            str(tmp_path / "sim"),
        ]
    )
    assert rc == 0
    report = json.loads((tmp_path / "sim" / "report.json").read_text())
    assert report["comm_total"] > 0
    assert report["compute_total"] > 0
    assert (tmp_path / "sim" / "report.csv").read_text().startswith("N,P,flavor,layer")


def test_simulate_sweep(tmp_path):
    rc = main(
        [
            "simulate",
            "--platform",
            "datacenter",
            "--neurons",
            "4096",
            "--sweep",
            "--out",
            str(tmp_path / "sweep"),
            "--quiet",
        ]
    )
    assert rc == 0
    lines = (tmp_path / "sweep" / "speedups.csv").read_text().strip().splitlines()
    assert len(lines) == 6  # header + dense + four flavors


def test_stats_planted_model(tmp_path, capsys):
    rng = np.random.default_rng(33)
    model, spec, _ = planted_scrambled_model(rng, P=2, widths=[6, 8, 4])
    from repurpose import repurpose_model, save_repurposed

    rep = repurpose_model(model, spec, RepurposeConfig(0.0, 0.25))
    save_repurposed(rep, tmp_path / "rep")
    (tmp_path / "partition.json").write_text(spec.to_json())
    rc = main(
        [
            "stats",
            str(tmp_path / "rep"),
            "--partition",
            str(tmp_path / "partition.json"),
            "--quiet",
        ]
    )
    assert rc == 0
    assert capsys.readouterr().out.strip() == "0"


def test_forward_equivalence(model_dir, capsys):
    rc = main(
        [
            "forward",
            str(model_dir / "model"),
            "--partition",
            str(model_dir / "partition.json"),
            "--samples",
            "4",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "max relative error" in out
