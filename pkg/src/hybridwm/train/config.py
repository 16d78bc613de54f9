"""Training configuration and its consistency rules."""

import hashlib
import json
from dataclasses import dataclass, field, asdict

from ..errors import ConfigError

LOSS_MODES = ("supervised", "self-consistency")


@dataclass(frozen=True)
class TrainConfig:
    env: str
    arch: dict
    ladder: tuple
    batch_size: int = 32
    samples_per_epoch: int = 1024
    epochs: int = 20
    lr: float = 2e-4
    weight_decay: float = 1e-4
    clip: float = 1.0
    warmup_epochs: int = 0
    dagger_lambda: float = 0.1
    patience: int = 15
    seed: int = 0
    loss_mode: str = "supervised"
    val_pairs: int = 128

    def __post_init__(self):
        object.__setattr__(self, "ladder", tuple(sorted(int(t) for t in self.ladder)))
        if not self.ladder:
            raise ConfigError("training ladder is empty")
        if not 0.0 <= self.dagger_lambda <= 1.0:
            raise ConfigError(f"dagger_lambda {self.dagger_lambda} outside [0, 1]")
        if self.loss_mode not in LOSS_MODES:
            raise ConfigError(f"unknown loss mode {self.loss_mode!r}")
        if self.loss_mode == "self-consistency":
            if self.dagger_lambda != 0.0:
                raise ConfigError("self-consistency training excludes DAgger (lambda must be 0)")
            if not self.probe_horizons():
                raise ConfigError("self-consistency needs a doubling-closed ladder (some T with T/2)")

    def validate_against_data(self, data_ladder, n_frames):
        if not set(self.ladder) <= set(int(t) for t in data_ladder):
            raise ConfigError(f"training ladder {self.ladder} not within data ladder {tuple(data_ladder)}")
        if max(self.ladder) >= n_frames:
            raise ConfigError(f"ladder max {max(self.ladder)} too long for {n_frames}-frame trajectories")

    def probe_horizons(self):
        """Horizons at which step-doubling is defined for this ladder."""
        return tuple(t for t in self.ladder if t % 2 == 0 and t // 2 in self.ladder)

    def is_single_horizon(self):
        return len(self.ladder) == 1

    def config_hash(self):
        payload = asdict(self)
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]
