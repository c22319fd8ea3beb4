"""Bernoulli rate coding of scaled feature grids into spike trains."""

from __future__ import annotations

import numpy as np

DEFAULT_TIME_STEPS = 50


class EncodingError(ValueError):
    """Grid values outside [0,1] violate the upstream scaling contract."""


def sample_rng(master_seed: int, epoch: int, index: int) -> np.random.Generator:
    """Per-sample generator derived from (master seed, epoch, sample index).

    Keeps whole runs reproducible while giving every sample fresh spike
    noise each epoch.
    """
    return np.random.default_rng([master_seed, epoch, index])


def rate_encode(grid: np.ndarray, time_steps: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a (T, 8, 16) binary spike train, cell (r, c) ~ Bernoulli(grid[r, c])."""
    grid = np.asarray(grid)
    if time_steps < 1:
        raise ValueError("time_steps must be >= 1")
    if np.any(grid < 0.0) or np.any(grid > 1.0):
        raise EncodingError("grid values must lie in [0, 1]")
    return (rng.random((time_steps,) + grid.shape) < grid).astype(np.float32)


def encode_batch(
    grids: np.ndarray, time_steps: int, master_seed: int, epoch: int, indices
) -> np.ndarray:
    """Encode a stack of grids (B, 8, 16) into (B, T, 8, 16) spike trains."""
    return np.stack(
        [
            rate_encode(g, time_steps, sample_rng(master_seed, epoch, int(i)))
            for g, i in zip(grids, indices)
        ]
    )
