import os
from pathlib import Path

import numpy as np
import pytest

from spikenose import snn, synthetic, training
from spikenose.config import DATA_DIR_ENV

TINY_CENSUS = {1: (6, 5, 4, 3, 2, 1), 2: (3, 3, 3, 3, 3, 3)}
TINY_CENSUS.update({b: (2, 2, 2, 1, 1, 1) for b in range(3, 11)})


@pytest.fixture(scope="session")
def synthetic_data_dir(tmp_path_factory) -> Path:
    """Full census-exact synthetic dataset on disk (13910 samples)."""
    root = tmp_path_factory.mktemp("synthetic_data")
    return synthetic.write_dataset(root, seed=0)


@pytest.fixture(scope="session")
def tiny_data_dir(tmp_path_factory) -> Path:
    """Small synthetic batches (all 10 present) for fast parser/CLI tests."""
    root = tmp_path_factory.mktemp("tiny_data")
    return synthetic.write_dataset(root, seed=1, census=TINY_CENSUS)


@pytest.fixture(scope="session")
def real_data_dir() -> Path:
    """The actual drift corpus, if the user pointed us at one."""
    path = os.environ.get(DATA_DIR_ENV)
    if not path or not Path(path).exists():
        pytest.skip(f"real dataset not available (set {DATA_DIR_ENV})")
    return Path(path)


@pytest.fixture
def tiny_network() -> snn.NetworkConfig:
    return snn.NetworkConfig(
        conv_channels=2,
        kernel_size=3,
        hidden=5,
        n_classes=3,
        time_steps=4,
        lif=snn.LifParams(gamma=0.8, v_thr=1.0, surrogate_slope=5.0),
    )


@pytest.fixture
def fast_train_config() -> training.TrainConfig:
    return training.TrainConfig(
        epochs=3,
        minibatch=16,
        seed=11,
        network=snn.NetworkConfig(conv_channels=4, hidden=8, time_steps=10),
    )


def random_weights(config: snn.NetworkConfig, rng: np.random.Generator, scale=0.5):
    c, k, h, o = config.conv_channels, config.kernel_size, config.hidden, config.n_classes
    return {
        "conv_w": rng.normal(0, scale, (c, 1, k, k)),
        "conv_b": rng.normal(0, 0.1, (c,)),
        "fc_w": rng.normal(0, 0.1, (h, config.flat_size)),
        "fc_b": rng.normal(0, 0.1, (h,)),
        "out_w": rng.normal(0, scale, (o, h)),
        "out_b": rng.normal(0, 0.1, (o,)),
    }
