"""Multi-horizon supervised training, DAgger refinement, and the ablation modes."""

from .config import TrainConfig
from .loop import TrainResult, train, identity_baseline_mse, draw_val_pairs
from .curves import write_curves, read_curves

__all__ = [
    "TrainConfig", "TrainResult", "train", "identity_baseline_mse",
    "draw_val_pairs", "write_curves", "read_curves",
]
