"""Horizon-pair extraction from trajectories."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass
class HorizonSample:
    s0: np.ndarray
    sT: np.ndarray
    horizon: int
    traj_index: int
    start: int


def validate_ladder(ladder, n_frames):
    ladder = sorted(int(t) for t in ladder)
    if not ladder:
        raise ConfigError("horizon ladder is empty")
    if ladder[0] < 1:
        raise ConfigError("horizons must be >= 1")
    if ladder[-1] >= n_frames:
        raise ConfigError(
            f"ladder horizon {ladder[-1]} needs trajectories longer than {n_frames} frames"
        )
    return tuple(ladder)


def n_starts(n_frames, horizon):
    """Valid start indices for (s_t, s_{t+T}): 0 .. n_frames-1-T inclusive."""
    return n_frames - horizon


def draw_pair(traj, ladder, rng, traj_index=0):
    t = int(ladder[rng.integers(len(ladder))])
    start = int(rng.integers(n_starts(traj.n_frames, t)))
    return HorizonSample(
        s0=traj.frames[start], sT=traj.frames[start + t],
        horizon=t, traj_index=traj_index, start=start,
    )


def extract_pairs(traj, ladder, rng, count, traj_index=0):
    """`count` samples with T uniform over the ladder, start uniform over legal range."""
    ladder = validate_ladder(ladder, traj.n_frames)
    return [draw_pair(traj, ladder, rng, traj_index) for _ in range(count)]
