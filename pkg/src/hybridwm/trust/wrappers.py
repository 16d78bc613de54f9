"""Forward-model wrappers sharing the surrogate's duck type.

All expose: ladder, is_multi_horizon, norm, forward_calls, predict_norm(s, T).
The solver wrapper uses identity normalization so normalize/denormalize are
bitwise no-ops and its exact semigroup survives the probe unchanged.
"""

import numpy as np

from .. import envs
from ..data.norm import identity_stats


class SolverModel:
    """Exact reference solver behind the model interface."""

    def __init__(self, params, ladder=(1, 2, 4, 8, 16, 32, 64)):
        self.params = params
        self.ladder = tuple(sorted(ladder))
        self.is_multi_horizon = len(self.ladder) > 1
        self.norm = identity_stats(envs.state_shape(params)[0])
        self.forward_calls = 0

    def predict_norm(self, state, horizon):
        self.forward_calls += 1
        cur = np.asarray(state, dtype=np.float32)
        for _ in range(int(horizon)):
            cur = envs.advance_frame(cur.astype(np.float64), self.params).astype(np.float32)
        return cur

    def predict(self, state, horizon):
        return self.predict_norm(state, horizon)


class IdentityModel:
    """f(s, T) = s; zero error map without being accurate."""

    def __init__(self, channels, ladder=(1, 2, 4, 8, 16, 32, 64)):
        self.ladder = tuple(sorted(ladder))
        self.is_multi_horizon = len(self.ladder) > 1
        self.norm = identity_stats(channels)
        self.forward_calls = 0

    def predict_norm(self, state, horizon):
        self.forward_calls += 1
        return np.asarray(state, dtype=np.float32).copy()

    predict = predict_norm


class LinearDriftModel:
    """f(s, T) = s + a*T everywhere, plus an extra bump b at one cell.

    Hand-computable probe: chaining accumulates the bump twice, so the map is
    |b| at the bump cell and zero elsewhere.
    """

    def __init__(self, dim, a, b, cell, ladder=(2, 4, 8)):
        self.dim = dim
        self.a, self.b, self.cell = a, b, cell
        self.ladder = tuple(sorted(set(ladder) | {t // 2 for t in ladder}))
        self.is_multi_horizon = True
        self.norm = identity_stats(dim)
        self.forward_calls = 0

    def predict_norm(self, state, horizon):
        self.forward_calls += 1
        out = np.asarray(state, dtype=np.float32) + np.float32(self.a * horizon)
        out[self.cell] += np.float32(self.b)
        return out

    predict = predict_norm
