"""Gas-sensor-drift dataset ingestion, feature math, normalization and splits.

The dataset is the 10-batch UCI gas sensor array drift corpus: 13910
samples, 128 features each (16 metal-oxide sensors x 8 features per
sensor), 6 odor classes. Batch files are plain text in sparse
``label idx:val`` format, one sample per line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

N_FEATURES = 128
N_SENSORS = 16
FEATURES_PER_SENSOR = 8
N_CLASSES = 6
N_BATCHES = 10

CLASS_NAMES = ("Ethanol", "Ethylene", "Ammonia", "Acetaldehyde", "Acetone", "Toluene")

# Published per-batch class census (rows: batch 1..10, columns follow
# CLASS_NAMES). Batch totals and the 13910 grand total derive from it.
BATCH_CENSUS: dict[int, tuple[int, ...]] = {
    1: (83, 30, 70, 98, 90, 74),
    2: (100, 109, 532, 334, 164, 5),
    3: (216, 240, 275, 490, 365, 0),
    4: (12, 30, 12, 43, 64, 0),
    5: (20, 46, 63, 40, 28, 0),
    6: (110, 29, 606, 574, 514, 467),
    7: (360, 744, 630, 662, 649, 568),
    8: (40, 33, 143, 30, 30, 18),
    9: (100, 75, 78, 55, 61, 101),
    10: (600, 600, 600, 600, 600, 600),
}

BATCH_TOTALS: dict[int, int] = {b: sum(c) for b, c in BATCH_CENSUS.items()}
TOTAL_SAMPLES = sum(BATCH_TOTALS.values())  # 13910


class ParseError(ValueError):
    """A malformed line in a batch file; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class CensusError(ValueError):
    """Dataset on disk disagrees with the published batch census."""


@dataclass(frozen=True)
class GasSample:
    """One 128-feature sensor-array reading.

    ``features`` is sensor-major: flat indices ``8*s .. 8*s+7`` belong to
    sensor ``s``. ``label`` is the odor class in 1..6 (see CLASS_NAMES),
    ``batch_id`` the acquisition batch in 1..10.
    """

    features: np.ndarray
    label: int
    batch_id: int

    def __post_init__(self):
        if self.features.shape != (N_FEATURES,):
            raise ValueError(f"expected {N_FEATURES} features, got {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("non-finite feature value")
        if not 1 <= self.label <= N_CLASSES:
            raise ValueError(f"label {self.label} outside 1..{N_CLASSES}")
        if not 1 <= self.batch_id <= N_BATCHES:
            raise ValueError(f"batch_id {self.batch_id} outside 1..{N_BATCHES}")


@dataclass(frozen=True)
class NormalizationStats:
    """Per-feature min/max of the log-transformed training set."""

    log_min: np.ndarray
    log_max: np.ndarray

    def __post_init__(self):
        if self.log_min.shape != (N_FEATURES,) or self.log_max.shape != (N_FEATURES,):
            raise ValueError("stats must cover all 128 features")
        if np.any(self.log_min > self.log_max):
            raise ValueError("min exceeds max")


def _parse_line(line: str, line_no: int, batch_id: int) -> GasSample:
    tokens = line.split()
    head = tokens[0]
    # Label field is "L" or "L;C"; concentration C is parsed and discarded.
    label_part, _, conc_part = head.partition(";")
    try:
        label = int(label_part)
    except ValueError:
        raise ParseError(line_no, f"bad label field {head!r}") from None
    if conc_part:
        try:
            float(conc_part)
        except ValueError:
            raise ParseError(line_no, f"bad concentration in {head!r}") from None
    if not 1 <= label <= N_CLASSES:
        raise ParseError(line_no, f"label {label} outside 1..{N_CLASSES}")

    features = np.full(N_FEATURES, np.nan)
    for tok in tokens[1:]:
        idx_s, sep, val_s = tok.partition(":")
        if not sep:
            raise ParseError(line_no, f"malformed pair {tok!r}")
        try:
            idx = int(idx_s)
            val = float(val_s)
        except ValueError:
            raise ParseError(line_no, f"non-numeric pair {tok!r}") from None
        if not 1 <= idx <= N_FEATURES:
            raise ParseError(line_no, f"feature index {idx} outside 1..{N_FEATURES}")
        if not math.isfinite(val):
            raise ParseError(line_no, f"non-finite value at index {idx}")
        if not np.isnan(features[idx - 1]):
            raise ParseError(line_no, f"duplicate feature index {idx}")
        features[idx - 1] = val
    missing = np.flatnonzero(np.isnan(features))
    if missing.size:
        raise ParseError(line_no, f"missing feature indices (first: {missing[0] + 1})")
    return GasSample(features=features, label=label, batch_id=batch_id)


def parse_batch_file(text: str | Iterable[str], batch_id: int) -> list[GasSample]:
    """Parse one batch file (dense libsvm-style lines) into GasSamples."""
    lines = text.splitlines() if isinstance(text, str) else text
    samples = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        samples.append(_parse_line(line, line_no, batch_id))
    return samples


def serialize_samples(samples: Sequence[GasSample]) -> str:
    """Inverse of parse_batch_file; floats use repr so round trips are exact."""
    lines = []
    for s in samples:
        pairs = " ".join(f"{i + 1}:{float(v)!r}" for i, v in enumerate(s.features))
        lines.append(f"{s.label} {pairs}")
    return "\n".join(lines) + "\n"


def batch_file_name(batch_id: int) -> str:
    return f"batch{batch_id}.dat"


def load_dataset(directory: str | Path, verify_census: bool = True) -> dict[int, list[GasSample]]:
    """Load batch1.dat..batch10.dat and (by default) check the census."""
    directory = Path(directory)
    batches: dict[int, list[GasSample]] = {}
    for b in range(1, N_BATCHES + 1):
        path = directory / batch_file_name(b)
        if not path.exists():
            raise CensusError(f"batch {b} absent: {path}")
        try:
            batches[b] = parse_batch_file(path.read_text(), b)
        except ParseError as e:
            raise ParseError(e.line_no, f"{path.name}: {e}") from e
    if verify_census:
        check_census(batches)
    return batches


def census(batches: dict[int, list[GasSample]]) -> dict[int, tuple[int, ...]]:
    """Per-batch per-class sample counts, keyed like BATCH_CENSUS."""
    out = {}
    for b, samples in sorted(batches.items()):
        counts = [0] * N_CLASSES
        for s in samples:
            counts[s.label - 1] += 1
        out[b] = tuple(counts)
    return out


def check_census(batches: dict[int, list[GasSample]]) -> None:
    """Raise CensusError on any deviation from the published counts."""
    got = census(batches)
    for b in range(1, N_BATCHES + 1):
        if b not in got:
            raise CensusError(f"batch {b} absent")
        total, expected_total = sum(got[b]), BATCH_TOTALS[b]
        if total != expected_total:
            raise CensusError(f"batch {b}: {total} samples != expected {expected_total}")
        if got[b] != BATCH_CENSUS[b]:
            raise CensusError(
                f"batch {b}: class counts {got[b]} != expected {BATCH_CENSUS[b]}"
            )


def log_transform(x):
    """Signed log: sign(x) * ln(1 + |x|). Odd, monotone, total on reals."""
    x = np.asarray(x)
    return np.sign(x) * np.log1p(np.abs(x))


def fit_stats(train_samples: Sequence[GasSample]) -> NormalizationStats:
    """Per-feature min/max of the log-transformed training features."""
    if not train_samples:
        raise ValueError("empty training set")
    mat = log_transform(np.stack([s.features for s in train_samples]))
    return NormalizationStats(log_min=mat.min(axis=0), log_max=mat.max(axis=0))


def scale_features(features: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    """Log-transform then min-max scale to [0,1], clamped; flat 128 vector."""
    logged = log_transform(features)
    span = stats.log_max - stats.log_min
    scaled = np.zeros(N_FEATURES)
    ok = span > 0  # degenerate features (min == max) map to 0
    scaled[ok] = (logged[ok] - stats.log_min[ok]) / span[ok]
    return np.clip(scaled, 0.0, 1.0)


def to_grid(flat: np.ndarray) -> np.ndarray:
    """Reshape a flat 128 vector so grid[r, c] = flat[c*8 + r] (8x16)."""
    return flat.reshape(N_SENSORS, FEATURES_PER_SENSOR).T


def scale(sample: GasSample, stats: NormalizationStats) -> np.ndarray:
    """Full preprocessing: signed log, min-max to [0,1], reshape to 8x16."""
    return to_grid(scale_features(sample.features, stats))


def steady_state_features(r: Sequence[float]) -> tuple[float, float]:
    """Max resistance swing and its baseline-normalized form.

    Returns (max r - min r, (max r - min r) / min r); errors if min r is 0.
    """
    r = np.asarray(r, dtype=float)
    if r.size < 2:
        raise ValueError("response needs at least 2 points")
    if not np.all(np.isfinite(r)):
        raise ValueError("non-finite response value")
    delta = float(r.max() - r.min())
    rmin = float(r.min())
    if rmin == 0.0:
        raise ZeroDivisionError("baseline minimum is zero; normalized form undefined")
    return delta, delta / rmin


def ema_features(r: Sequence[float], alpha: float) -> tuple[float, float]:
    """Max/min of the exponential moving average of the first differences.

    ema[k] = (1-alpha) * ema[k-1] + alpha * (r[k] - r[k-1]), ema[0] = 0.
    The max captures the rising transient, the min the decaying one.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    r = np.asarray(r, dtype=float)
    if r.size < 2:
        raise ValueError("response needs at least 2 points")
    ema = 0.0
    hi = lo = 0.0
    for k in range(1, r.size):
        ema = (1.0 - alpha) * ema + alpha * (r[k] - r[k - 1])
        hi = max(hi, ema)
        lo = min(lo, ema)
    return hi, lo


def random_split(
    batches: dict[int, list[GasSample]], ratio: float, seed: int
) -> tuple[list[GasSample], list[GasSample]]:
    """Stratified-by-class train/test partition of all batches pooled."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    pooled = [s for b in sorted(batches) for s in batches[b]]
    rng = np.random.default_rng(seed)
    train: list[GasSample] = []
    test: list[GasSample] = []
    for cls in range(1, N_CLASSES + 1):
        members = [s for s in pooled if s.label == cls]
        order = rng.permutation(len(members))
        n_train = round(len(members) * ratio)
        for j, idx in enumerate(order):
            (train if j < n_train else test).append(members[idx])
    return train, test


def short_term_pairs() -> list[tuple[int, int]]:
    """Train on batch i, test on batch i+1, for i = 1..9."""
    return [(i, i + 1) for i in range(1, N_BATCHES)]


def long_term_pairs() -> list[tuple[int, int]]:
    """Train on batch 1, test on batch j, for j = 2..10."""
    return [(1, j) for j in range(2, N_BATCHES + 1)]
