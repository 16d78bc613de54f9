"""Reference solvers: ground truth for training, scoring, and deferral."""

from dataclasses import dataclass, asdict

import numpy as np

from . import ball3d, euler2d, oregonator
from .ball3d import BallParams, ball_step, mechanical_energy
from .euler2d import EulerParams, euler_step, hll_flux
from .oregonator import OregonatorParams, oregonator_step, homogeneous_root

ENV_NAMES = {0: "oregonator", 1: "euler", 2: "ball"}
ENV_IDS = {v: k for k, v in ENV_NAMES.items()}

_BC_CODES = {"transmissive": 0.0, "periodic": 1.0}
_BC_NAMES = {v: k for k, v in _BC_CODES.items()}


@dataclass
class Trajectory:
    env_id: int
    dt: float                 # frame interval
    params: dict              # solver parameters, name -> float
    frames: np.ndarray        # (N, 9) or (N, C, H, W), float32

    @property
    def n_frames(self):
        return self.frames.shape[0]


def env_id_of(params):
    if isinstance(params, OregonatorParams):
        return 0
    if isinstance(params, EulerParams):
        return 1
    if isinstance(params, BallParams):
        return 2
    raise TypeError(f"unknown params type {type(params).__name__}")


def state_shape(params):
    if isinstance(params, OregonatorParams):
        return (2, params.grid, params.grid)
    if isinstance(params, EulerParams):
        return (4, params.grid, params.grid)
    return (9,)


def frame_dt(params):
    return params.dt_frame if isinstance(params, EulerParams) else params.dt


def advance_frame(state, params):
    """One frame in float64; dispatches on the params type."""
    if isinstance(params, OregonatorParams):
        return oregonator_step(state, params)
    if isinstance(params, EulerParams):
        return euler_step(state, params)[0]
    return ball_step(state, params)


def rollout(params, ic, frames):
    """Roll `frames` frames from `ic`; frame 0 is `ic` itself.

    Every stored frame is rounded to float32 and the next step starts from
    that rounded frame, so restarting a rollout from any stored frame
    reproduces the remainder bitwise (solver semigroup).
    """
    if frames < 2:
        raise ValueError("a trajectory needs at least 2 frames")
    shape = state_shape(params)
    out = np.empty((frames,) + shape, dtype=np.float32)
    cur = np.asarray(ic, dtype=np.float64).astype(np.float32)
    out[0] = cur
    for i in range(1, frames):
        cur = advance_frame(cur.astype(np.float64), params).astype(np.float32)
        out[i] = cur
    return Trajectory(env_id=env_id_of(params), dt=frame_dt(params), params=params_to_dict(params), frames=out)


def params_to_dict(params):
    d = asdict(params)
    if isinstance(params, EulerParams):
        d["bc"] = _BC_CODES[d["bc"]]
    return {k: float(v) for k, v in d.items()}


def params_from_dict(env_id, d):
    if env_id == 0:
        return OregonatorParams(
            eps_kin=d["eps_kin"], q_kin=d["q_kin"], f_kin=d["f_kin"], D=d["D"],
            dt=d["dt"], grid=int(d["grid"]), domain=d["domain"],
        )
    if env_id == 1:
        return EulerParams(
            gamma=d["gamma"], cfl=d["cfl"], grid=int(d["grid"]),
            bc=_BC_NAMES[d["bc"]], dt_frame=d["dt_frame"],
        )
    if env_id == 2:
        return BallParams(
            gravity=d["gravity"], restitution=d["restitution"],
            substeps=int(d["substeps"]), dt=d["dt"],
        )
    raise ValueError(f"unknown env id {env_id}")


def make_initial(params, kind, rng, **kwargs):
    """Initial condition for any environment; deterministic given the rng state."""
    if isinstance(params, OregonatorParams):
        return oregonator.initial_state(params, kind, rng)
    if isinstance(params, EulerParams):
        return euler2d.initial_state(params, kind, rng, **kwargs)
    if isinstance(params, BallParams):
        if kind != "default":
            raise ValueError(f"unknown ball initial-condition kind {kind!r}")
        return ball3d.initial_state(rng)
    raise TypeError(f"unknown params type {type(params).__name__}")
