"""Run configuration: a flat INI file with sections, fully reproducible.

Every run writes the exact configuration it used into its output directory
so results can be audited and replayed.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import snn
from .training import TrainConfig

DATA_DIR_ENV = "SPIKENOSE_DATA_DIR"


@dataclass(frozen=True)
class RunConfig:
    data_dir: str = "data"
    out_dir: str = "runs/default"
    setting: str = "split"
    split_ratio: float = 0.8
    mc_samples: int = 20  # posterior draws per prediction
    train: TrainConfig = field(default_factory=TrainConfig)

    @property
    def network(self) -> snn.NetworkConfig:
        return self.train.network

    @property
    def seed(self) -> int:
        return self.train.seed

    def resolved_data_dir(self) -> Path:
        """CLI/env override wins over the config file value."""
        return Path(os.environ.get(DATA_DIR_ENV, self.data_dir))


def to_ini(config: RunConfig) -> str:
    net = config.network
    train = config.train
    parser = configparser.ConfigParser()
    parser["run"] = {
        "data_dir": config.data_dir,
        "out_dir": config.out_dir,
        "setting": config.setting,
        "split_ratio": repr(config.split_ratio),
        "seed": str(train.seed),
    }
    parser["network"] = {
        "conv_channels": str(net.conv_channels),
        "kernel_size": str(net.kernel_size),
        "hidden": str(net.hidden),
        "time_steps": str(net.time_steps),
        "gamma": repr(net.lif.gamma),
        "v_thr": repr(net.lif.v_thr),
        "surrogate_slope": repr(net.lif.surrogate_slope),
    }
    parser["train"] = {
        "epochs": str(train.epochs),
        "minibatch": str(train.minibatch),
        "learning_rate": repr(train.learning_rate),
        "adam_beta1": repr(train.adam_beta1),
        "adam_beta2": repr(train.adam_beta2),
        "adam_eps": repr(train.adam_eps),
    }
    parser["bayes"] = {
        "kl_weight": repr(train.kl_weight),
        "prior_sigma": repr(train.prior_sigma),
        "mc_samples": str(config.mc_samples),
    }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def from_ini(text: str) -> RunConfig:
    parser = configparser.ConfigParser()
    parser.read_string(text)
    run = parser["run"] if parser.has_section("run") else {}
    net_s = parser["network"] if parser.has_section("network") else {}
    train_s = parser["train"] if parser.has_section("train") else {}
    bayes_s = parser["bayes"] if parser.has_section("bayes") else {}

    defaults = RunConfig()
    d_net, d_train = defaults.network, defaults.train
    lif = snn.LifParams(
        gamma=float(net_s.get("gamma", d_net.lif.gamma)),
        v_thr=float(net_s.get("v_thr", d_net.lif.v_thr)),
        surrogate_slope=float(net_s.get("surrogate_slope", d_net.lif.surrogate_slope)),
    )
    network = snn.NetworkConfig(
        conv_channels=int(net_s.get("conv_channels", d_net.conv_channels)),
        kernel_size=int(net_s.get("kernel_size", d_net.kernel_size)),
        hidden=int(net_s.get("hidden", d_net.hidden)),
        time_steps=int(net_s.get("time_steps", d_net.time_steps)),
        lif=lif,
    )
    train = TrainConfig(
        epochs=int(train_s.get("epochs", d_train.epochs)),
        minibatch=int(train_s.get("minibatch", d_train.minibatch)),
        learning_rate=float(train_s.get("learning_rate", d_train.learning_rate)),
        adam_beta1=float(train_s.get("adam_beta1", d_train.adam_beta1)),
        adam_beta2=float(train_s.get("adam_beta2", d_train.adam_beta2)),
        adam_eps=float(train_s.get("adam_eps", d_train.adam_eps)),
        kl_weight=float(bayes_s.get("kl_weight", d_train.kl_weight)),
        prior_sigma=float(bayes_s.get("prior_sigma", d_train.prior_sigma)),
        seed=int(run.get("seed", d_train.seed)),
        network=network,
    )
    return RunConfig(
        data_dir=run.get("data_dir", defaults.data_dir),
        out_dir=run.get("out_dir", defaults.out_dir),
        setting=run.get("setting", defaults.setting),
        split_ratio=float(run.get("split_ratio", defaults.split_ratio)),
        mc_samples=int(bayes_s.get("mc_samples", defaults.mc_samples)),
        train=train,
    )


def load(path: str | Path) -> RunConfig:
    return from_ini(Path(path).read_text())


def default_ini() -> str:
    return to_ini(RunConfig())
