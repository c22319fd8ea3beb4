#!/usr/bin/env python3
"""Fetch the public 10-batch gas sensor drift corpus into a local directory.

Downloads the UCI archive zip, extracts it, and copies the batch files
into the target directory as batch1.dat .. batch10.dat (lowercase, the
names the loader expects). Needs outbound network access; in offline
environments use make_synthetic_dataset.py instead.

Usage:
    python scripts/download_dataset.py --out data/
    export SPIKENOSE_DATA_DIR=$PWD/data
"""

from __future__ import annotations

import argparse
import re
import shutil
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

# The corpus is published twice; the concentration-annotated variant has
# the same 13910 samples with a "label;concentration" head field, which
# the parser also accepts.
URLS = (
    "https://archive.ics.uci.edu/static/public/224/gas+sensor+array+drift+dataset.zip",
    "https://archive.ics.uci.edu/static/public/270/"
    "gas+sensor+array+drift+dataset+at+different+concentrations.zip",
)

BATCH_RE = re.compile(r"batch(\d+)\.dat$", re.IGNORECASE)


def fetch(url: str, dest: Path) -> None:
    print(f"downloading {url}")
    with urllib.request.urlopen(url, timeout=120) as resp, open(dest, "wb") as f:
        shutil.copyfileobj(resp, f)


def extract_batches(zip_path: Path, out_dir: Path) -> int:
    found = 0
    with zipfile.ZipFile(zip_path) as zf:
        for info in zf.infolist():
            m = BATCH_RE.search(info.filename)
            if not m:
                continue
            target = out_dir / f"batch{int(m.group(1))}.dat"
            with zf.open(info) as src, open(target, "wb") as dst:
                shutil.copyfileobj(src, dst)
            found += 1
    return found


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data", help="target directory")
    args = parser.parse_args()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    last_error: Exception | None = None
    for url in URLS:
        with tempfile.TemporaryDirectory() as tmp:
            zip_path = Path(tmp) / "corpus.zip"
            try:
                fetch(url, zip_path)
                n = extract_batches(zip_path, out_dir)
            except Exception as e:  # noqa: BLE001 - report and try the mirror
                print(f"failed: {e}", file=sys.stderr)
                last_error = e
                continue
            if n == 10:
                print(f"wrote 10 batch files to {out_dir}")
                print(f"verify with: spikenose ingest --data {out_dir} --check")
                return 0
            print(f"archive held {n} batch files, expected 10", file=sys.stderr)
    print(f"could not obtain the corpus ({last_error})", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
