"""Dataset layer: split sampling, generation, persistence, normalization, pairs."""

from .splits import SplitSpec, SPLITS, BANDS, sample_params, sample_band, in_band, band_for, check_disjoint
from .trajio import read_trajectory, write_trajectory, valid_trajectory_file
from .generate import generate_split, load_manifest, load_split, split_dir, traj_filename
from .norm import NormStats, compute_norm_stats, normalize, denormalize, identity_stats, STD_FLOOR
from .pairs import HorizonSample, extract_pairs, draw_pair, validate_ladder, n_starts

__all__ = [
    "SplitSpec", "SPLITS", "BANDS", "sample_params", "sample_band", "in_band",
    "band_for", "check_disjoint",
    "read_trajectory", "write_trajectory", "valid_trajectory_file",
    "generate_split", "load_manifest", "load_split", "split_dir", "traj_filename",
    "NormStats", "compute_norm_stats", "normalize", "denormalize", "identity_stats",
    "STD_FLOOR",
    "HorizonSample", "extract_pairs", "draw_pair", "validate_ladder", "n_starts",
]
