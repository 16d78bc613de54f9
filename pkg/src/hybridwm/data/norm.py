"""Per-channel normalization statistics, computed on the train split only."""

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

STD_FLOOR = 1e-6


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray   # (C,) float64
    std: np.ndarray    # (C,) float64, floored at STD_FLOOR

    @property
    def channels(self):
        return self.mean.shape[0]


def _channel_axes(state):
    """Channel axis and reduction axes for (..,C,H,W) fields or (..,C) vectors."""
    if state.ndim >= 3:
        return state.ndim - 3, tuple(i for i in range(state.ndim) if i != state.ndim - 3)
    return state.ndim - 1, tuple(range(state.ndim - 1))


def compute_norm_stats(trajectories, split="train"):
    """Population mean/std per channel over every frame of the given trajectories.

    Refuses any split other than train: statistics must never see evaluation
    data.
    """
    if split != "train":
        raise ConfigError(f"normalization statistics must come from train, not {split!r}")
    total = None
    total_sq = None
    count = 0
    for traj in trajectories:
        frames = traj.frames.astype(np.float64)
        ax, red = _channel_axes(frames[0])
        red = (0,) + tuple(a + 1 for a in red)
        s = frames.sum(axis=red)
        s2 = (frames * frames).sum(axis=red)
        n = frames.size // frames.shape[1 if frames.ndim == 2 else frames.ndim - 3]
        if total is None:
            total, total_sq = s, s2
        else:
            total += s
            total_sq += s2
        count += n
    if count == 0:
        raise ConfigError("no frames to compute statistics from")
    mean = total / count
    var = total_sq / count - mean * mean
    std = np.sqrt(np.maximum(var, 0.0))
    low = std < STD_FLOOR
    if low.any():
        warnings.warn(f"zero-variance channels {np.where(low)[0].tolist()}; std floored")
        std = np.maximum(std, STD_FLOOR)
    return NormStats(mean=mean, std=std)


def normalize(state, ns):
    state = np.asarray(state)
    ax, _ = _channel_axes(state)
    shape = [1] * state.ndim
    shape[ax] = ns.channels
    m = ns.mean.reshape(shape).astype(state.dtype)
    s = ns.std.reshape(shape).astype(state.dtype)
    return (state - m) / s


def denormalize(state, ns):
    state = np.asarray(state)
    ax, _ = _channel_axes(state)
    shape = [1] * state.ndim
    shape[ax] = ns.channels
    m = ns.mean.reshape(shape).astype(state.dtype)
    s = ns.std.reshape(shape).astype(state.dtype)
    return state * s + m


def identity_stats(channels):
    """Stats that make normalize/denormalize exact no-ops (for solver wrappers)."""
    return NormStats(mean=np.zeros(channels), std=np.ones(channels))
