#!/usr/bin/env python3
"""Generate a synthetic dataset with the exact published batch census.

Useful offline: the files exercise the full pipeline (parsing, census
check, training, evaluation) but accuracy numbers on them say nothing
about the real corpus.

Usage:
    python scripts/make_synthetic_dataset.py --out data-synth/ --seed 0
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from spikenose import synthetic


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data-synth", help="target directory")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    out = synthetic.write_dataset(Path(args.out), seed=args.seed)
    print(f"wrote batch1.dat..batch10.dat (13910 samples) to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
