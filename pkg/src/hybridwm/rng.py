"""Deterministic RNG derivation.

Every random draw in the package comes from a Generator derived here, so the
whole pipeline is a pure function of the root seed plus string/int context
keys (env name, split name, trajectory seed, ...).
"""

import zlib

import numpy as np


def _as_entropy(key):
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFF
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    raise TypeError(f"rng key must be int or str, got {type(key).__name__}")


def rng_for(*keys):
    """Generator seeded by an ordered tuple of ints/strings."""
    entropy = [_as_entropy(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
