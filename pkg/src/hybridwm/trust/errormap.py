"""The step-doubling error map: disagreement between one-shot and chained prediction.

    e_hat(s, T) = || f(s, T) - f(f(s, T/2), T/2) ||

computed in normalized space, per cell (channel-wise L2) for spatial states and
as a scalar for vector states. Exactly three forward passes, regardless of T.
Any model satisfying the exact semigroup property (a solver wrapper, the
identity map) yields a bitwise-zero map.
"""

from dataclasses import dataclass

import numpy as np

from ..data.norm import normalize
from ..errors import InvalidHorizonError, SingleHorizonProbeError


@dataclass
class ErrorMap:
    values: object          # (H, W) ndarray or python float
    horizon: int

    @property
    def is_spatial(self):
        return isinstance(self.values, np.ndarray)


def aggregate(emap):
    """Trajectory-level scalar: spatial mean of the field, pass-through for scalars."""
    if emap.is_spatial:
        return float(np.mean(emap.values))
    return float(emap.values)


def check_probe_horizon(model, horizon, allow_extrapolation=False):
    if not model.is_multi_horizon:
        raise SingleHorizonProbeError(
            "step-doubling probe is structurally undefined on a single-horizon checkpoint"
        )
    if horizon % 2 != 0:
        raise InvalidHorizonError(f"probe horizon {horizon} is odd; T/2 must be integral")
    if not allow_extrapolation:
        ladder = set(model.ladder)
        if horizon not in ladder or horizon // 2 not in ladder:
            raise InvalidHorizonError(
                f"probe horizon {horizon} needs both {horizon} and {horizon // 2} "
                f"in the training ladder {tuple(sorted(ladder))}"
            )


def step_doubling(model, state, horizon, allow_extrapolation=False):
    """Probe a raw-space state; returns the normalized-space ErrorMap."""
    check_probe_horizon(model, horizon, allow_extrapolation)
    s = normalize(np.asarray(state, dtype=np.float32), model.norm)
    single = model.predict_norm(s, horizon)
    mid = model.predict_norm(s, horizon // 2)
    chained = model.predict_norm(mid, horizon // 2)
    d = single - chained
    if d.ndim >= 3:
        field = np.sqrt((d.astype(np.float64) ** 2).sum(axis=-3))
        return ErrorMap(values=field, horizon=horizon)
    return ErrorMap(values=float(np.sqrt((d.astype(np.float64) ** 2).sum())), horizon=horizon)
