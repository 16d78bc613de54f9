"""Shared fixtures.

Unit tests use tiny generated datasets; the acceptance module additionally
builds the two desk-scale training runs (Ball 3D and Euler 2D) once per
session and shares the artifacts across criteria.
"""

import os

import numpy as np
import pytest

from hybridwm import configs, data, pipeline


def tiny_ball_config(**overrides):
    cfg = configs.default_config("ball", "desk")
    cfg["data"]["counts"] = {"train": 12, "val": 6, "test": 8, "ood-near": 4, "ood-far": 4}
    cfg["data"]["frames"] = 41
    cfg["train"].update({
        "epochs": 4,
        "samples_per_epoch": 256,
        "batch_size": 32,
        "val_pairs": 48,
        "arch": {"kind": "film_mlp", "state_dim": 9, "hidden": 64, "blocks": 2,
                 "act": "silu", "cond_hidden": 32, "out_gain": 0.1},
    })
    cfg["trust"].update({"horizons": [2, 8], "head_max_trajs": 8})
    cfg["deploy"]["horizon"] = 8
    cfg["eval"].update({"closed_loop_ks": [1, 2, 4], "closed_loop_horizon": 8,
                        "closed_loop_trajs": 4, "beyond_tmax": [32, 36],
                        "bootstrap_resamples": 100})
    cfg["bench"].update({"horizons": [2, 8], "repeats": 3})
    for key, value in overrides.items():
        cfg[key].update(value) if isinstance(value, dict) else cfg.__setitem__(key, value)
    return configs.resolve(cfg)


@pytest.fixture(scope="session")
def ball_mini(tmp_path_factory):
    """Tiny generated ball dataset: (train, val) trajectory lists."""
    root = tmp_path_factory.mktemp("ball_mini")
    spec_tr = data.SplitSpec(env="ball", split="train", count=12, seed_start=0, frames=41, root_seed=7)
    spec_va = data.SplitSpec(env="ball", split="val", count=6, seed_start=100000, frames=41, root_seed=7)
    data.generate_split(spec_tr, str(root / "train"))
    data.generate_split(spec_va, str(root / "val"))
    return (data.load_split(str(root / "train")), data.load_split(str(root / "val")))


@pytest.fixture(scope="session")
def euler_mini(tmp_path_factory):
    """Tiny generated euler dataset at 32x32: (train, val) trajectory lists."""
    root = tmp_path_factory.mktemp("euler_mini")
    fields = {"grid": 32, "gamma": 1.4, "cfl": 0.4, "dt_frame": 0.002, "bc": "transmissive"}
    spec_tr = data.SplitSpec(env="euler", split="train", count=6, seed_start=0,
                             frames=40, root_seed=7, env_fields=fields)
    spec_va = data.SplitSpec(env="euler", split="val", count=4, seed_start=100000,
                             frames=40, root_seed=7, env_fields=fields)
    data.generate_split(spec_tr, str(root / "train"))
    data.generate_split(spec_va, str(root / "val"))
    return (data.load_split(str(root / "train")), data.load_split(str(root / "val")))


# -- desk-scale artifacts for the acceptance suite --------------------------


@pytest.fixture(scope="session")
def desk_ball(tmp_path_factory):
    """Desk Ball 3D run per the acceptance config: gen + train + trust scores."""
    out = str(tmp_path_factory.mktemp("desk_ball"))
    cfg = configs.resolve(configs.default_config("ball", "desk"))
    pipeline.cmd_gen(cfg, out)
    result = pipeline.cmd_train(cfg, out)
    pipeline.cmd_trust(cfg, out)
    return {"cfg": cfg, "out": out, "result": result}


@pytest.fixture(scope="session")
def desk_euler(tmp_path_factory):
    """Desk Euler 2D run per the acceptance config: gen + train + trust scores."""
    out = str(tmp_path_factory.mktemp("desk_euler"))
    cfg = configs.resolve(configs.default_config("euler", "desk"))
    pipeline.cmd_gen(cfg, out)
    result = pipeline.cmd_train(cfg, out)
    pipeline.cmd_trust(cfg, out)
    return {"cfg": cfg, "out": out, "result": result}
