"""Command-line front end.

Subcommands: repurpose, sparsify, verify, simulate, stats, forward.
Exit codes: 0 ok, 1 verification failure, 2 input error, 3 infeasible.
All randomness is controlled by --seed, so runs reproduce exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .assignment import RepurposeConfig
from .errors import (
    CertificateError,
    InfeasibleError,
    InputError,
    RepurposeError,
    VerificationError,
)
from .io import load_model
from .model import forward
from .partition import PartitionSpec, build_mask, cross_edge_count
from .pipeline import (
    calibrate_eta2,
    direct_sparsify,
    error_certificate,
    load_repurposed,
    repurpose_model,
    save_repurposed,
)
from .sharding import distributed_forward, shard_model
from .simulator import (
    PlatformConfig,
    Workload,
    simulate,
    speedup_report,
    speedup_report_csv,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


def _say(args, *parts):
    if not args.quiet:
        print(*parts)


def _common(sub):
    sub.add_argument("--seed", type=int, default=0, help="seed for generated probe data")
    sub.add_argument("--out", type=Path, default=None, help="output directory")
    sub.add_argument("--quiet", action="store_true", help="suppress progress output")


def _load_inputs(args):
    model = load_model(args.model)
    spec = PartitionSpec.load(args.partition)
    spec.validate_model(model)
    return model, spec


def _restructure_cmd(args, baseline: bool) -> int:
    model, spec = _load_inputs(args)
    if baseline:
        if args.eta2 is None:
            raise InputError("sparsify requires --eta2")
        cfg = RepurposeConfig(args.eta1, args.eta2)
        rep = direct_sparsify(model, spec, cfg)
    else:
        if (args.eta2 is None) == (args.epsilon is None):
            raise InputError("provide exactly one of --eta2 or --epsilon")
        if args.epsilon is not None:
            cfg = calibrate_eta2(model, spec, eta1=args.eta1, epsilon=args.epsilon)
            _say(args, f"calibrated eta2 = {cfg.eta2:.6g} for deviation budget {args.epsilon}")
        else:
            cfg = RepurposeConfig(args.eta1, args.eta2)
        rep = repurpose_model(model, spec, cfg, permute_output=not args.fixed_output)
    rng = np.random.default_rng(args.seed)
    probe = rng.normal(size=(model.input_width, args.probe_samples))
    cert = error_certificate(model, rep, probe)
    for l in range(model.num_layers):
        _say(
            args,
            f"layer {l}: cross edges {rep.cross_edges_before[l]} -> {rep.cross_edges_after[l]}, "
            f"deviation {rep.per_layer_deviation[l]:.6g}",
        )
    _say(args, f"certificate: tau={cert.tau:.6g} B={cert.B:.6g} bound={cert.bound:.6g}")
    if args.out is not None:
        save_repurposed(rep, args.out, certificate=cert)
        _say(args, f"wrote restructured model to {args.out}")
    return EXIT_OK


def cmd_repurpose(args) -> int:
    return _restructure_cmd(args, baseline=False)


def cmd_sparsify(args) -> int:
    return _restructure_cmd(args, baseline=True)


def cmd_verify(args) -> int:
    verify_mod.run(args.mode, trials=args.trials, seed=args.seed, quiet=args.quiet)
    _say(args, f"verify {args.mode}: OK ({args.trials} trials, seed {args.seed})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    platform = PlatformConfig.load(args.platform)
    if args.sweep:
        rows = speedup_report(platform, args.neurons)
        csv_text = speedup_report_csv(rows)
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / "speedups.csv").write_text(csv_text)
        if not args.quiet:
            print(csv_text, end="")
        return EXIT_OK
    workload = Workload(
        neurons=args.neurons,
        nodes=args.nodes,
        sparsity=args.sparsity,
        layers=args.layers,
    )
    report = simulate(platform, workload)
    payload = json.dumps(report.to_dict(), indent=2)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "report.json").write_text(payload)
        (args.out / "report.csv").write_text(report.to_csv())
    if not args.quiet:
        print(payload)
    return EXIT_OK


def cmd_stats(args) -> int:
    model, spec = _load_inputs(args)
    rows = []
    for l, layer in enumerate(model.layers):
        mask = build_mask(spec.counts[l], spec.counts[l + 1])
        cross = cross_edge_count(layer.weight, mask)
        cross_positions = int(np.count_nonzero(mask))
        nonzeros = int(np.count_nonzero(layer.weight))
        rows.append(
            {
                "layer": l,
                "cross_edges": cross,
                "cross_positions": cross_positions,
                "nonzeros": nonzeros,
                "size": int(layer.weight.size),
            }
        )
        _say(
            args,
            f"layer {l}: {cross} cross edges over {cross_positions} cross positions "
            f"({nonzeros} nonzeros total)",
        )
    total = sum(r["cross_edges"] for r in rows)
    _say(args, f"total cross edges: {total}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "stats.json").write_text(
            json.dumps({"layers": rows, "total_cross_edges": total}, indent=2)
        )
    if args.quiet:
        print(total)
    return EXIT_OK


def cmd_forward(args) -> int:
    model = load_model(args.model)
    spec = PartitionSpec.load(args.partition)
    spec.validate_model(model)
    rng = np.random.default_rng(args.seed)
    X = rng.normal(size=(model.input_width, args.samples))
    sharded = shard_model(model, spec)
    run = distributed_forward(sharded, X)
    reference = forward(model, X).output
    scale = np.maximum(np.abs(reference), 1.0)
    err = float(np.max(np.abs(run.output - reference) / scale))
    print(f"max relative error: {err:.3e}")
    comm = run.comm_log.total_values()
    _say(args, f"communicated values per sample: {comm}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "comm_log.csv").write_text(run.comm_log.to_csv())
    if err > 1e-9:
        raise VerificationError(f"distributed forward deviates: {err:.3e} > 1e-9")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repurpose",
        description="Restructure trained networks for low-communication parallel inference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rep = sub.add_parser("repurpose", help="permute and prune a model for a partition")
    p_rep.add_argument("model", type=Path, help="RPM v1 model directory")
    p_rep.add_argument("--partition", type=Path, required=True, help="partition JSON")
    p_rep.add_argument("--eta1", type=float, default=0.0, help="total-sparsity penalty")
    p_rep.add_argument("--eta2", type=float, default=None, help="cross-edge penalty")
    p_rep.add_argument(
        "--epsilon", type=float, default=None, help="per-layer squared deviation budget"
    )
    p_rep.add_argument(
        "--fixed-output",
        action="store_true",
        help="keep the output layer's neuron order (skip its reassignment)",
    )
    p_rep.add_argument("--probe-samples", type=int, default=64)
    _common(p_rep)
    p_rep.set_defaults(func=cmd_repurpose)

    p_sp = sub.add_parser("sparsify", help="prune cross edges without rearranging neurons")
    p_sp.add_argument("model", type=Path)
    p_sp.add_argument("--partition", type=Path, required=True)
    p_sp.add_argument("--eta1", type=float, default=0.0)
    p_sp.add_argument("--eta2", type=float, default=None)
    p_sp.add_argument("--probe-samples", type=int, default=64)
    _common(p_sp)
    p_sp.set_defaults(func=cmd_sparsify)

    p_ver = sub.add_parser("verify", help="run an oracle self-check suite")
    p_ver.add_argument("mode", choices=sorted(verify_mod.VERIFIERS))
    p_ver.add_argument("--trials", type=int, default=50)
    _common(p_ver)
    p_ver.set_defaults(func=cmd_verify)

    p_sim = sub.add_parser("simulate", help="analytic platform timing")
    p_sim.add_argument("--platform", default="datacenter", help="bundled name or JSON path")
    p_sim.add_argument("--neurons", type=int, required=True)
    p_sim.add_argument("--nodes", type=int, default=2)
    p_sim.add_argument("--sparsity", type=float, default=0.0)
    p_sim.add_argument("--layers", type=int, default=5)
    p_sim.add_argument(
        "--sweep", action="store_true", help="emit speedup table over flavors and node counts"
    )
    _common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_st = sub.add_parser("stats", help="cross-edge counts of a model under a partition")
    p_st.add_argument("model", type=Path)
    p_st.add_argument("--partition", type=Path, required=True)
    _common(p_st)
    p_st.set_defaults(func=cmd_stats)

    p_fw = sub.add_parser("forward", help="distributed vs monolithic execution check")
    p_fw.add_argument("model", type=Path)
    p_fw.add_argument("--partition", type=Path, required=True)
    p_fw.add_argument("--samples", type=int, default=8)
    _common(p_fw)
    p_fw.set_defaults(func=cmd_forward)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (VerificationError, CertificateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RepurposeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
