"""Learned error head: a small regressor from pooled features to log(1 + RMSE).

Fitted on train-split residuals of the frozen surrogate only; querying an
unfitted head is an error, and feeding it rows from any other split is a leak
and is rejected.
"""

import numpy as np

from ..errors import ConfigError
from ..rng import rng_for
from ..tnn import AdamWState, EMBED_DIM, Tensor, adamw_step, collect_grads, horizon_embed, matmul, mean_sq, silu


class ErrorHead:
    def __init__(self, n_features, hidden=32, seed=0):
        rng = rng_for(seed, "error-head")
        d_in = n_features + EMBED_DIM
        lim1 = np.sqrt(6.0 / (d_in + hidden))
        lim2 = np.sqrt(6.0 / (hidden + 1))
        self.w1 = Tensor(rng.uniform(-lim1, lim1, (d_in, hidden)).astype(np.float32), requires_grad=True, name="w1")
        self.b1 = Tensor(np.zeros(hidden, dtype=np.float32), requires_grad=True, name="b1")
        self.w2 = Tensor(rng.uniform(-lim2, lim2, (hidden, 1)).astype(np.float32), requires_grad=True, name="w2")
        self.b2 = Tensor(np.zeros(1, dtype=np.float32), requires_grad=True, name="b2")
        self.fitted = False
        self._mu = None
        self._sd = None

    def _params(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def _inputs(self, features, horizons):
        emb = np.stack([horizon_embed(int(t)) for t in horizons])
        x = np.concatenate([np.asarray(features, dtype=np.float64), emb], axis=1)
        return ((x - self._mu) / self._sd).astype(np.float32)

    def _forward(self, x):
        h = silu(matmul(Tensor(x), self.w1) + self.b1)
        return matmul(h, self.w2) + self.b2

    def fit(self, features, horizons, true_rmse, splits, steps=400, lr=1e-2):
        """Regress log1p(true RMSE); every row must be tagged 'train'."""
        bad = [s for s in splits if s != "train"]
        if bad:
            raise ConfigError(f"error head fitted on non-train rows: {sorted(set(bad))}")
        feats = np.asarray(features, dtype=np.float64)
        emb = np.stack([horizon_embed(int(t)) for t in horizons])
        raw = np.concatenate([feats, emb], axis=1)
        self._mu = raw.mean(axis=0)
        self._sd = np.maximum(raw.std(axis=0), 1e-8)
        x = self._inputs(features, horizons)
        y = np.log1p(np.asarray(true_rmse, dtype=np.float32)).reshape(-1, 1)
        opt = AdamWState(self._params(), lr=lr, weight_decay=0.0, clip=None)
        target = Tensor(y)
        last = np.inf
        for _ in range(steps):
            loss = mean_sq(self._forward(x), target)
            grads, _ = collect_grads(loss, self._params())
            adamw_step(opt, self._params(), grads)
            last = float(loss.data)
        self.fitted = True
        return last

    def score(self, features, horizon):
        if not self.fitted:
            raise ConfigError("error head queried before fitting")
        x = self._inputs(np.asarray(features, dtype=np.float64)[None], [horizon])
        return float(self._forward(x).data[0, 0])
