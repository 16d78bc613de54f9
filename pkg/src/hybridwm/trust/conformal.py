"""Locally adaptive conformal difficulty estimate.

sigma_hat(s, T) = mean true RMSE of the k nearest calibration points in pooled
feature space. The calibration set comes from the validation split; test and
OOD labels never enter it.
"""

import warnings

import numpy as np

from ..errors import ConfigError


class ConformalScorer:
    def __init__(self, features, true_rmse, k=10):
        feats = np.asarray(features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] == 0:
            raise ConfigError("conformal scorer needs a non-empty calibration set")
        if k > feats.shape[0]:
            warnings.warn(
                f"conformal k={k} larger than calibration set ({feats.shape[0]}); clamped"
            )
            k = feats.shape[0]
        self.k = int(k)
        self.errors = np.asarray(true_rmse, dtype=np.float64)
        self._mu = feats.mean(axis=0)
        self._sd = np.maximum(feats.std(axis=0), 1e-12)
        self.features = (feats - self._mu) / self._sd

    def score(self, features):
        q = (np.asarray(features, dtype=np.float64) - self._mu) / self._sd
        d2 = ((self.features - q) ** 2).sum(axis=1)
        nearest = np.argsort(d2, kind="stable")[: self.k]
        return float(self.errors[nearest].mean())
