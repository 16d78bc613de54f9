"""Classical Richardson step-doubling on the reference solver.

Two solver legs per query: the standard internal step, and the internal step
halved. `fix` divides the raw leg difference by (2^p - 1) with p the solver's
nominal order; `prod` refines with the per-cell geometric mean of the two legs
and scores the distance of leg A from that refined estimate. Unlike the
surrogate probe, cost scales with the horizon; wall time of both legs is
reported alongside the score.
"""

import time
from dataclasses import replace

import numpy as np

from .. import envs
from ..errors import ConfigError
from .errormap import ErrorMap

# nominal convergence order per environment (config-overridable)
DEFAULT_ORDERS = {"oregonator": 2, "euler": 1, "ball": 1}

VARIANTS = ("fix", "prod")


def _halved(params):
    if isinstance(params, envs.EulerParams):
        return replace(params, cfl=params.cfl / 2.0), 1
    if isinstance(params, envs.OregonatorParams):
        return replace(params, dt=params.dt / 2.0), 2
    return replace(params, substeps=params.substeps * 2), 1


def _advance(state, params, frames):
    cur = np.asarray(state, dtype=np.float32)
    for _ in range(frames):
        cur = envs.advance_frame(cur.astype(np.float64), params).astype(np.float32)
    return cur


def richardson_score(params, state, horizon, variant="fix", order=None):
    """Returns (ErrorMap, cost_seconds)."""
    if variant not in VARIANTS:
        raise ConfigError(f"unknown richardson variant {variant!r}")
    half_params, frame_factor = _halved(params)
    t0 = time.perf_counter()
    y_a = _advance(state, params, horizon)
    y_b = _advance(state, half_params, horizon * frame_factor)
    cost = time.perf_counter() - t0
    a = y_a.astype(np.float64)
    b = y_b.astype(np.float64)
    if variant == "fix":
        p = order if order is not None else DEFAULT_ORDERS[envs.ENV_NAMES[envs.env_id_of(params)]]
        diff = (a - b) / (2.0**p - 1.0)
    else:
        gm = np.sign(a) * np.sqrt(np.maximum(a * b, 0.0))
        diff = a - gm
    if diff.ndim >= 3:
        field = np.sqrt((diff * diff).sum(axis=-3))
        return ErrorMap(values=field, horizon=horizon), cost
    return ErrorMap(values=float(np.sqrt((diff * diff).sum())), horizon=horizon), cost
