"""Command-line entry point: ingest, train, eval, energy, report."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import config as config_mod
from . import dataset, energy, evaluation, reporting, training


def _census_csv(batches) -> str:
    header = "batch,total," + ",".join(n.lower() for n in dataset.CLASS_NAMES)
    lines = [header]
    for b, counts in sorted(dataset.census(batches).items()):
        lines.append(f"{b},{sum(counts)}," + ",".join(str(c) for c in counts))
    return "\n".join(lines) + "\n"


def _load_run_config(args) -> config_mod.RunConfig:
    cfg = config_mod.load(args.config) if args.config else config_mod.RunConfig()
    train = cfg.train
    if getattr(args, "seed", None) is not None:
        train = dataclasses.replace(train, seed=args.seed)
    if getattr(args, "time_steps", None) is not None:
        network = dataclasses.replace(train.network, time_steps=args.time_steps)
        train = dataclasses.replace(train, network=network)
    if getattr(args, "out", None):
        cfg = dataclasses.replace(cfg, out_dir=str(args.out), train=train)
    else:
        cfg = dataclasses.replace(cfg, train=train)
    return cfg


def _write_config_copy(cfg: config_mod.RunConfig) -> None:
    reporting.write_atomic(Path(cfg.out_dir) / "config.ini", config_mod.to_ini(cfg))


def cmd_ingest(args) -> int:
    batches = dataset.load_dataset(args.data, verify_census=False)
    sys.stdout.write(_census_csv(batches))
    if args.check:
        dataset.check_census(batches)  # raises CensusError on mismatch
    return 0


def cmd_train(args) -> int:
    cfg = _load_run_config(args)
    cfg.network.assert_param_budget()
    batches = dataset.load_dataset(cfg.resolved_data_dir(), verify_census=False)
    train_set, _ = dataset.random_split(batches, cfg.split_ratio, cfg.seed)
    result = training.train(cfg.train, train_set)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_config_copy(cfg)
    metrics = {"final_loss": result.history[-1].loss,
               "final_train_acc": result.history[-1].train_accuracy}
    training.save_checkpoint(
        result.model, cfg.train, out / "checkpoint.bin",
        epoch=cfg.train.epochs - 1, metrics=metrics,
    )
    reporting.write_atomic(out / "loss_curve.csv", training.history_csv(result.history))
    print(f"trained {cfg.train.epochs} epochs; final loss {metrics['final_loss']:.4f}, "
          f"train acc {metrics['final_train_acc']:.4f}")
    return 0


def cmd_eval(args) -> int:
    cfg = _load_run_config(args)
    if args.setting:
        cfg = dataclasses.replace(cfg, setting=args.setting)
    cfg.network.assert_param_budget()
    batches = dataset.load_dataset(cfg.resolved_data_dir(), verify_census=False)
    reports = evaluation.run_setting(
        cfg.setting, batches, cfg.train, cfg.mc_samples, cfg.split_ratio
    )
    _write_config_copy(cfg)
    evaluation.write_setting_outputs(reports, cfg.out_dir)
    for r in reports:
        ref = f" (reference {r.reference:.2f})" if r.reference is not None else ""
        print(f"{r.pair_label}: accuracy {r.accuracy:.2f}%{ref}")
    return 0


def cmd_energy(args) -> int:
    if args.golden:
        profile = energy.golden_profile()
    else:
        if not args.checkpoint or not args.data:
            raise ValueError("measured mode needs --checkpoint and --data")
        model, _ = training.load_checkpoint(args.checkpoint)
        batches = dataset.load_dataset(args.data, verify_census=False)
        samples = [s for b in sorted(batches) for s in batches[b]]
        if args.limit and args.limit < len(samples):
            samples = samples[:: max(1, len(samples) // args.limit)][: args.limit]
        profile = energy.measured_profile(model, samples, seed=args.seed or 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv = energy.energy_csv(profile)
    reporting.write_atomic(out / "energy.csv", csv)
    sys.stdout.write(csv)
    return 0


def cmd_report(args) -> int:
    summary = reporting.combined_report(args.out)
    reporting.write_atomic(Path(args.out) / "summary.md", summary)
    sys.stdout.write(summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikenose",
        description="Spiking-convolutional Bayesian gas classifier: dataset "
        "ingestion, training, drift evaluation, and energy reporting.",
    )
    parser.add_argument("--print-defaults", action="store_true",
                        help="print the default run configuration and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="parse the batch files and print the census")
    p.add_argument("--data", required=True, help="directory with batch1.dat..batch10.dat")
    p.add_argument("--check", action="store_true",
                   help="verify the census against the published counts")
    p.set_defaults(func=cmd_ingest)

    for name, func, helptext in (
        ("train", cmd_train, "train a model on the stratified split"),
        ("eval", cmd_eval, "run one evaluation setting end to end"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="run configuration INI file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--time-steps", type=int, dest="time_steps",
                       help="override the simulation step count")
        if name == "eval":
            p.add_argument("--setting", choices=evaluation.SETTINGS,
                           help="evaluation protocol (overrides the config)")
        p.set_defaults(func=func)

    p = sub.add_parser("energy", help="emit the FLOPS/energy report")
    p.add_argument("--golden", action="store_true",
                   help="reproduce the published energy totals")
    p.add_argument("--checkpoint", help="trained checkpoint for measured mode")
    p.add_argument("--data", help="dataset directory for measured activity")
    p.add_argument("--limit", type=int, default=200,
                   help="max samples used for activity measurement")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("report", help="combine all CSVs in a run directory")
    p.add_argument("--out", required=True, help="run directory to summarize")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(config_mod.default_ini())
        return 0
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except Exception as e:  # runtime failure contract: diagnostic + exit 1
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
