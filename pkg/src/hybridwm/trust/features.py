"""Pooled state features shared by the learned error head and conformal scoring."""

import numpy as np

from ..data.norm import normalize


def pooled_features(state, norm, horizon):
    """Per-channel (mean, std, min, max) of the normalized state, plus log2(T)."""
    s = normalize(np.asarray(state, dtype=np.float32), norm).astype(np.float64)
    flat = s.reshape(s.shape[0], -1) if s.ndim >= 3 else s.reshape(-1, 1)
    feats = np.concatenate(
        [flat.mean(axis=1), flat.std(axis=1), flat.min(axis=1), flat.max(axis=1)]
    )
    return np.concatenate([feats, [np.log2(float(horizon))]])
