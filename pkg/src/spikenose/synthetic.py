"""Census-exact synthetic stand-in for the real drift dataset.

The real corpus must be fetched from its public repository (see
scripts/download_dataset.py); this module fabricates batch files with the
exact published per-batch class counts so the ingestion, training, and
evaluation machinery can be exercised offline. Class signatures are
separable sensor patterns; a per-batch offset that grows with the batch id
mimics drift. Synthetic accuracy numbers say nothing about the published
tables.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import dataset


def _class_pattern(label: int, rng: np.random.Generator) -> np.ndarray:
    # Smooth per-class template over the 128 features, positive scale to
    # resemble resistance-derived magnitudes.
    base = rng.normal(0.0, 1.0, dataset.N_FEATURES)
    phase = np.linspace(0, 2 * np.pi * label, dataset.N_FEATURES)
    return 40.0 * np.sin(phase + label) + 15.0 * base + 60.0


def generate_sample(
    label: int, batch_id: int, rng: np.random.Generator, templates: dict[int, np.ndarray]
) -> dataset.GasSample:
    drift = 4.0 * (batch_id - 1) * np.sin(np.linspace(0, np.pi, dataset.N_FEATURES))
    noise = rng.normal(0.0, 6.0, dataset.N_FEATURES)
    features = templates[label] + drift + noise
    return dataset.GasSample(features=features, label=label, batch_id=batch_id)


def generate_batches(
    seed: int = 0, census: dict[int, tuple[int, ...]] | None = None
) -> dict[int, list[dataset.GasSample]]:
    census = census or dataset.BATCH_CENSUS
    rng = np.random.default_rng([seed, 0x5EED])
    templates = {c: _class_pattern(c, rng) for c in range(1, dataset.N_CLASSES + 1)}
    batches: dict[int, list[dataset.GasSample]] = {}
    for batch_id, counts in sorted(census.items()):
        samples = []
        for label, n in enumerate(counts, start=1):
            samples.extend(
                generate_sample(label, batch_id, rng, templates) for _ in range(n)
            )
        batches[batch_id] = samples
    return batches


def write_dataset(directory: str | Path, seed: int = 0,
                  census: dict[int, tuple[int, ...]] | None = None) -> Path:
    """Write batch1.dat..batchN.dat into ``directory``; returns the path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for batch_id, samples in generate_batches(seed, census).items():
        path = directory / dataset.batch_file_name(batch_id)
        path.write_text(dataset.serialize_samples(samples))
    return directory
