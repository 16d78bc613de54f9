"""Run configuration: desk/paper profiles, strict schema validation, resolution.

One JSON document drives the whole pipeline. Unknown keys are rejected, every
run writes its resolved config next to its outputs, and the `paper` profile
records the full-scale values for documentation even though the desk suite
never runs them.
"""

import copy
import hashlib
import json

from . import __version__
from .errors import ConfigError

SEED_OFFSETS = {"train": 0, "val": 100000, "test": 200000, "ood-near": 300000, "ood-far": 400000}

_COMMON = {
    "trust": {
        "methods": [],
        "horizons": [2, 4, 8, 16, 32],
        "tta_k": 8,
        "tta_sigma": 0.01,
        "conformal_k": 10,
        "head_max_trajs": 40,
        "richardson_horizons": [],
        "richardson_max_trajs": 6,
    },
    "deploy": {"q_values": [0.5, 0.6, 0.75, 0.85, 0.9], "q_default": 0.75, "horizon": 8},
    "eval": {
        "percentile": 75,
        "bootstrap_resamples": 1000,
        "bootstrap_level": 0.95,
        "closed_loop_ks": [1, 2, 4, 8],
        "closed_loop_horizon": 8,
        "closed_loop_trajs": 8,
        "beyond_tmax": [32, 48, 64],
    },
    "bench": {"repeats": 5, "warmup": 1, "horizons": [2, 8, 64], "threads": 0},
    "render": {"horizons": [2, 8, 32], "traj_index": 0, "channel": 0},
}

_DESK = {
    "ball": {
        "seed": 0,
        "env": {"name": "ball", "dt": 0.01, "substeps": 50},
        "data": {
            "counts": {"train": 100, "val": 20, "test": 32, "ood-near": 16, "ood-far": 16},
            "frames": 101,
            "ladder": [1, 2, 4, 8, 16, 32],
        },
        "train": {
            "mode": "supervised",
            "arch": {"kind": "film_mlp", "state_dim": 9, "hidden": 256, "blocks": 4,
                     "act": "silu", "cond_hidden": 128, "out_gain": 0.1},
            "ladder": [1, 2, 4, 8, 16, 32],
            "batch_size": 128,
            "samples_per_epoch": 3072,
            "epochs": 40,
            "lr": 3e-4,
            "weight_decay": 1e-4,
            "clip": 1.0,
            "warmup_epochs": 0,
            "dagger_lambda": 0.1,
            "patience": 15,
            "val_pairs": 256,
        },
    },
    "euler": {
        "seed": 0,
        "env": {"name": "euler", "grid": 64, "gamma": 1.4, "cfl": 0.4,
                "dt_frame": 0.002, "bc": "transmissive"},
        "data": {
            "counts": {"train": 50, "val": 16, "test": 32, "ood-near": 12, "ood-far": 12},
            "frames": 100,
            "ladder": [1, 2, 4, 8, 16, 32],
        },
        "train": {
            "mode": "supervised",
            "arch": {"kind": "unet", "channels": 4, "base": 16, "stages": 2,
                     "act": "silu", "cond_hidden": 128, "out_gain": 0.1},
            "ladder": [1, 2, 4, 8, 16, 32],
            "batch_size": 8,
            "samples_per_epoch": 800,
            "epochs": 18,
            "lr": 2e-4,
            "weight_decay": 1e-4,
            "clip": 1.0,
            "warmup_epochs": 0,
            "dagger_lambda": 0.1,
            "patience": 15,
            "val_pairs": 96,
        },
    },
    "oregonator": {
        "seed": 0,
        "env": {"name": "oregonator", "grid": 64, "domain": 32.0, "q_kin": 0.002,
                "D": 1.0, "dt": 0.05},
        "data": {
            "counts": {"train": 120, "val": 15, "test": 15, "ood-near": 15, "ood-far": 15},
            "frames": 201,
            "ladder": [1, 2, 4, 8, 16, 32],
        },
        "train": {
            "mode": "supervised",
            "arch": {"kind": "unet", "channels": 2, "base": 16, "stages": 2,
                     "act": "silu", "cond_hidden": 128, "out_gain": 0.1},
            "ladder": [1, 2, 4, 8, 16, 32],
            "batch_size": 8,
            "samples_per_epoch": 800,
            "epochs": 20,
            "lr": 2e-4,
            "weight_decay": 1e-4,
            "clip": 1.0,
            "warmup_epochs": 3,
            "dagger_lambda": 0.1,
            "patience": 15,
            "val_pairs": 96,
        },
    },
}

_METHODS = {
    "ball": ["step_doubling", "tta", "error_head", "conformal", "energy", "momentum"],
    "euler": ["step_doubling", "tta", "grad_mag", "error_head", "conformal"],
    "oregonator": ["step_doubling", "tta", "grad_mag", "error_head", "conformal"],
}

# Full-scale values from the source experiment grids; documentation only.
_PAPER_OVERRIDES = {
    "oregonator": {
        "env": {"grid": 256},
        "data": {"counts": {"train": 1200, "val": 150, "test": 150, "ood-near": 250, "ood-far": 250},
                 "frames": 201, "ladder": [1, 2, 4, 8, 16, 32, 64]},
        "train": {"ladder": [1, 2, 4, 8, 16, 32, 64], "epochs": 60, "samples_per_epoch": 5000,
                  "arch": {"kind": "unet", "channels": 2, "base": 48, "stages": 4,
                           "act": "silu", "cond_hidden": 128, "out_gain": 0.1}},
    },
    "euler": {
        "env": {"grid": 128},
        "data": {"counts": {"train": 500, "val": 100, "test": 100, "ood-near": 150, "ood-far": 150},
                 "frames": 100, "ladder": [1, 2, 4, 8, 16, 32, 64]},
        "train": {"ladder": [1, 2, 4, 8, 16, 32, 64], "epochs": 40, "samples_per_epoch": 2000,
                  "arch": {"kind": "unet", "channels": 4, "base": 48, "stages": 4,
                           "act": "silu", "cond_hidden": 128, "out_gain": 0.1}},
    },
    "ball": {
        "data": {"counts": {"train": 1000, "val": 200, "test": 200, "ood-near": 200, "ood-far": 200},
                 "frames": 101, "ladder": [1, 2, 4, 8, 16, 32, 64]},
        "train": {"ladder": [1, 2, 4, 8, 16, 32, 64], "epochs": 80, "samples_per_epoch": 25600},
    },
}


def _deep_update(base, overrides):
    for k, v in overrides.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            _deep_update(base[k], v)
        else:
            base[k] = copy.deepcopy(v)
    return base


def default_config(env, profile="desk"):
    if env not in _DESK:
        raise ConfigError(f"unknown environment {env!r}")
    if profile not in ("desk", "paper"):
        raise ConfigError(f"unknown profile {profile!r}")
    cfg = copy.deepcopy(_DESK[env])
    cfg.update(copy.deepcopy(_COMMON))
    cfg["trust"]["methods"] = list(_METHODS[env])
    if env == "euler":
        cfg["trust"]["richardson_horizons"] = [2, 4, 8]
    cfg["data"]["seed_offsets"] = dict(SEED_OFFSETS)
    cfg["profile"] = profile
    if profile == "paper":
        _deep_update(cfg, _PAPER_OVERRIDES[env])
        cfg["eval"]["beyond_tmax"] = [64, 96]
    return cfg


# -- validation -----------------------------------------------------------

_ENV_KEYS = {
    "ball": {"name": str, "dt": float, "substeps": int},
    "euler": {"name": str, "grid": int, "gamma": float, "cfl": float,
              "dt_frame": float, "bc": str},
    "oregonator": {"name": str, "grid": int, "domain": float, "q_kin": float,
                   "D": float, "dt": float},
}

_SCHEMA = {
    "seed": int,
    "profile": str,
    "env": dict,
    "data": {"counts": dict, "frames": int, "ladder": list, "seed_offsets": dict},
    "train": {"mode": str, "arch": dict, "ladder": list, "batch_size": int,
              "samples_per_epoch": int, "epochs": int, "lr": float,
              "weight_decay": float, "clip": float, "warmup_epochs": int,
              "dagger_lambda": float, "patience": int, "val_pairs": int},
    "trust": {"methods": list, "horizons": list, "tta_k": int, "tta_sigma": float,
              "conformal_k": int, "head_max_trajs": int,
              "richardson_horizons": list, "richardson_max_trajs": int},
    "deploy": {"q_values": list, "q_default": float, "horizon": int},
    "eval": {"percentile": int, "bootstrap_resamples": int, "bootstrap_level": float,
             "closed_loop_ks": list, "closed_loop_horizon": int, "closed_loop_trajs": int,
             "beyond_tmax": list},
    "bench": {"repeats": int, "warmup": int, "horizons": list, "threads": int},
    "render": {"horizons": list, "traj_index": int, "channel": int},
}

TRAIN_MODES = ("supervised", "self-consistency", "single-horizon")


def _check_keys(section, spec, path):
    unknown = set(section) - set(spec)
    if unknown:
        raise ConfigError(f"unknown config keys at {path}: {sorted(unknown)}")
    for key, want in spec.items():
        if key not in section:
            raise ConfigError(f"missing config key {path}.{key}")
        value = section[key]
        if isinstance(want, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path}.{key} must be an object")
            _check_keys(value, want, f"{path}.{key}")
        elif want is float:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{path}.{key} must be a number")
        elif not isinstance(value, want) or isinstance(value, bool) and want is int:
            raise ConfigError(f"{path}.{key} must be {want.__name__}")


def validate_config(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    body = {k: v for k, v in cfg.items() if k != "code_version"}
    _check_keys(body, _SCHEMA, "$")
    env_name = cfg["env"].get("name")
    if env_name not in _ENV_KEYS:
        raise ConfigError(f"env.name must be one of {sorted(_ENV_KEYS)}")
    _check_keys(cfg["env"], _ENV_KEYS[env_name], "$.env")
    if cfg["train"]["mode"] not in TRAIN_MODES:
        raise ConfigError(f"train.mode must be one of {TRAIN_MODES}")
    data_ladder = set(int(t) for t in cfg["data"]["ladder"])
    frames = cfg["data"]["frames"]
    if max(data_ladder) >= frames:
        raise ConfigError("data ladder exceeds trajectory length")
    train_ladder = set(int(t) for t in cfg["train"]["ladder"])
    if cfg["train"]["mode"] == "single-horizon":
        train_ladder = {max(train_ladder)}
    if not train_ladder <= data_ladder:
        raise ConfigError(f"train ladder {sorted(train_ladder)} not within data ladder {sorted(data_ladder)}")
    probeable = {t for t in train_ladder if t % 2 == 0 and t // 2 in train_ladder}
    probe_requested = set(int(t) for t in cfg["trust"]["horizons"])
    if cfg["train"]["mode"] != "single-horizon" and not probe_requested <= probeable:
        raise ConfigError(
            f"trust horizons {sorted(probe_requested)} not probeable with ladder "
            f"{sorted(train_ladder)} (need T even with T/2 in the ladder)"
        )
    if cfg["deploy"]["horizon"] not in probe_requested:
        raise ConfigError("deploy.horizon must be one of trust.horizons")
    for q in cfg["deploy"]["q_values"] + [cfg["deploy"]["q_default"]]:
        if not 0.0 <= q <= 1.0:
            raise ConfigError(f"q value {q} outside [0, 1]")
    ks = cfg["eval"]["closed_loop_ks"]
    if max(ks) * cfg["eval"]["closed_loop_horizon"] >= frames:
        raise ConfigError("closed-loop span exceeds trajectory length")
    for t in cfg["eval"]["beyond_tmax"]:
        if t % 2 != 0:
            raise ConfigError(f"beyond-Tmax horizon {t} is odd")
        if t >= frames:
            raise ConfigError(f"beyond-Tmax horizon {t} exceeds trajectory length")
    offsets = cfg["data"]["seed_offsets"]
    counts = cfg["data"]["counts"]
    spans = sorted((offsets[s], offsets[s] + counts[s], s) for s in counts)
    for (lo1, hi1, s1), (lo2, hi2, s2) in zip(spans, spans[1:]):
        if hi1 > lo2:
            raise ConfigError(f"seed ranges of splits {s1!r} and {s2!r} overlap")
    return cfg


def config_hash(cfg):
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def resolve(cfg, seed=None, threads=None):
    """Apply flag overrides and stamp the code version; returns a validated copy."""
    out = copy.deepcopy(cfg)
    if seed is not None:
        out["seed"] = int(seed)
    if threads is not None:
        out["bench"]["threads"] = int(threads)
    validate_config(out)
    out["code_version"] = __version__
    return out
