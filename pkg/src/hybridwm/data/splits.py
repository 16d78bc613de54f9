"""Split-aware environment-parameter sampling.

Each split owns a disjoint trajectory-seed range; a trajectory's parameters,
initial-condition kind, and initial state are all drawn from one Generator
keyed by (root seed, env, trajectory seed), so the dataset is a pure function
of the resolved configuration.

Union-of-interval bands are sampled by picking an interval with probability
proportional to its length, then uniformly inside it.
"""

from dataclasses import dataclass, field

import numpy as np

from ..envs import BallParams, EulerParams, OregonatorParams
from ..errors import ConfigError
from ..rng import rng_for

SPLITS = ("train", "val", "test", "ood-near", "ood-far")

# per-split parameter bands; a band is a tuple of (lo, hi) intervals
BANDS = {
    "oregonator": {
        "eps_kin": {
            "id": ((0.02, 0.08),),
            "ood-near": ((0.015, 0.02), (0.08, 0.10)),
            "ood-far": ((0.010, 0.015), (0.10, 0.15)),
        },
        "f_kin": {
            "id": ((0.5, 2.0),),
            "ood-near": ((0.4, 0.5), (2.0, 2.2)),
            "ood-far": ((0.3, 0.4), (2.2, 2.5)),
        },
    },
    "euler": {
        "sedov_e0": {
            "id": ((0.5, 2.0),),
            "ood-near": ((0.3, 0.5), (2.0, 2.5)),
            "ood-far": ((0.1, 0.3), (2.5, 5.0)),
        },
        "sedov_rho_bg": {
            "id": ((0.8, 1.2),),
            "ood-near": ((0.6, 0.8), (1.2, 1.5)),
            "ood-far": ((0.4, 0.6), (1.5, 2.0)),
        },
    },
    "ball": {
        "restitution": {
            "id": ((0.70, 0.95),),
            "ood-near": ((0.50, 0.70), (0.95, 0.99)),
            "ood-far": ((0.30, 0.50),),
        },
        "gravity": {
            "id": ((-10.5, -9.0),),
            "ood-near": ((-12.0, -10.5), (-9.0, -7.5)),
            "ood-far": ((-15.0, -12.0), (-7.5, -5.0)),
        },
    },
}

SR_INTERFACE_JITTER_FAR = 0.05   # +-5% wall-position perturbation, OOD-far only


def band_for(env, name, split):
    rows = BANDS[env][name]
    key = split if split in rows else "id"
    return rows[key]


def sample_band(intervals, rng):
    intervals = tuple(intervals)
    for lo, hi in intervals:
        if not hi > lo:
            raise ConfigError(f"malformed band interval ({lo}, {hi})")
    lengths = np.array([hi - lo for lo, hi in intervals])
    idx = int(rng.choice(len(intervals), p=lengths / lengths.sum())) if len(intervals) > 1 else 0
    lo, hi = intervals[idx]
    return float(rng.uniform(lo, hi))


def in_band(value, intervals):
    return any(lo <= value <= hi for lo, hi in intervals)


@dataclass(frozen=True)
class SplitSpec:
    env: str                      # "oregonator" | "euler" | "ball"
    split: str                    # one of SPLITS
    count: int
    seed_start: int               # trajectory seeds are seed_start + index
    frames: int
    root_seed: int = 0
    env_fields: dict = field(default_factory=dict)   # fixed solver fields (grid, dt, ...)

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ConfigError(f"unknown split {self.split!r}")
        if self.env not in BANDS:
            raise ConfigError(f"unknown env {self.env!r}")

    def seed_range(self):
        return range(self.seed_start, self.seed_start + self.count)


def check_disjoint(specs):
    seen = {}
    for spec in specs:
        for s in spec.seed_range():
            if s in seen:
                raise ConfigError(
                    f"seed {s} shared by splits {seen[s]!r} and {spec.split!r}"
                )
            seen[s] = spec.split
    return True


def trajectory_rng(spec, index):
    if not 0 <= index < spec.count:
        raise ConfigError(f"trajectory index {index} outside split of {spec.count}")
    return rng_for(spec.root_seed, spec.env, spec.seed_start + index)


def sample_params(spec, index, rng=None):
    """Deterministic (solver params, ic kind, ic kwargs) for trajectory `index`.

    Pass the trajectory's Generator to keep consuming the same stream (the
    initial condition is drawn from what remains); omitted, a fresh one is
    derived, which always yields the same parameters for the same (spec, index).
    """
    if rng is None:
        rng = trajectory_rng(spec, index)
    env, split = spec.env, spec.split
    fixed = spec.env_fields
    if env == "ball":
        e = sample_band(band_for(env, "restitution", split), rng)
        g = sample_band(band_for(env, "gravity", split), rng)
        params = BallParams(
            gravity=g, restitution=e,
            substeps=int(fixed.get("substeps", 50)), dt=fixed.get("dt", 0.01),
        )
        return params, "default", {}
    if env == "euler":
        e0 = sample_band(band_for(env, "sedov_e0", split), rng)
        rho = sample_band(band_for(env, "sedov_rho_bg", split), rng)
        params = EulerParams(
            gamma=fixed.get("gamma", 1.4), cfl=fixed.get("cfl", 0.4),
            grid=int(fixed.get("grid", 64)), bc=fixed.get("bc", "transmissive"),
            dt_frame=fixed.get("dt_frame", 2e-3),
        )
        jitter = SR_INTERFACE_JITTER_FAR if split == "ood-far" else 0.0
        kwargs = {"e0": e0, "rho_bg": rho, "interface_jitter": jitter}
        return params, "mix", kwargs
    # oregonator: OOD shifts eps only / f only / both, in equal proportion
    sub = int(rng.integers(3)) if split in ("ood-near", "ood-far") else -1
    eps_split = split if sub in (1, 2) else ("id" if sub == 0 else split)
    f_split = split if sub in (0, 2) else ("id" if sub == 1 else split)
    eps = sample_band(band_for(env, "eps_kin", eps_split), rng)
    f = sample_band(band_for(env, "f_kin", f_split), rng)
    params = OregonatorParams(
        eps_kin=eps, q_kin=fixed.get("q_kin", 0.002), f_kin=f, D=fixed.get("D", 1.0),
        dt=fixed.get("dt", 0.05), grid=int(fixed.get("grid", 64)),
        domain=fixed.get("domain", 32.0),
    )
    return params, "mix", {}
