#!/usr/bin/env python3
"""Run the full experiment pipeline against a dataset directory.

Steps: census check, training on the stratified split, all three
evaluation settings, golden and measured energy reports, and the
combined markdown summary. Everything goes through the CLI so a run is
reproducible from the INI it writes.

Usage:
    python scripts/run_experiments.py --data data/ --out runs/full --seed 1234
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from spikenose.cli import main as cli
from spikenose.config import DATA_DIR_ENV


def step(argv: list[str]) -> None:
    print(f"\n$ spikenose {' '.join(argv)}")
    code = cli(argv)
    if code != 0:
        sys.exit(code)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", required=True, help="directory with batch files")
    parser.add_argument("--out", default="runs/full", help="output root")
    parser.add_argument("--seed", type=int, default=1234)
    parser.add_argument("--skip-census-check", action="store_true",
                        help="allow datasets that deviate from the published census")
    args = parser.parse_args()
    out = Path(args.out)

    # train/eval read the dataset location from the environment
    os.environ[DATA_DIR_ENV] = args.data

    ingest = ["ingest", "--data", args.data]
    if not args.skip_census_check:
        ingest.append("--check")
    step(ingest)

    common = ["--seed", str(args.seed)]
    step(["train", "--out", str(out / "train")] + common)
    for setting in ("split", "short", "long"):
        step(["eval", "--setting", setting, "--out", str(out / setting)] + common)
    step(["energy", "--golden", "--out", str(out / "energy-golden")])
    step(["energy", "--checkpoint", str(out / "train" / "checkpoint.bin"),
          "--data", args.data, "--out", str(out / "energy-measured")])
    for sub in ("train", "split", "short", "long", "energy-golden", "energy-measured"):
        step(["report", "--out", str(out / sub)])
    print(f"\nall outputs under {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
