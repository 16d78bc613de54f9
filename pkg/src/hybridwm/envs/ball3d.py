"""Rigid ball bouncing inside the unit cube.

Semi-implicit Euler: velocity first, then position, at `substeps` per saved
frame. Wall collisions clamp the position to the wall and reflect the normal
velocity component with the restitution factor. Angular velocity is carried
but untouched in flight. All arithmetic is float64; frame storage rounds to
float32 in the rollout driver.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import SolverAbortError

ENV_ID = 2
STATE_DIM = 9


@dataclass(frozen=True)
class BallParams:
    gravity: float = -9.8       # signed z acceleration, m/s^2
    restitution: float = 0.8
    substeps: int = 50
    dt: float = 0.01            # frame step, s

    def __post_init__(self):
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if not 0.0 < self.restitution <= 1.0:
            raise ValueError("restitution must be in (0, 1]")


def ball_step(state, p):
    """Advance one frame. state: float64 (9,) = (pos3, vel3, angvel3)."""
    s = np.asarray(state, dtype=np.float64)
    x, y, z = float(s[0]), float(s[1]), float(s[2])
    vx, vy, vz = float(s[3]), float(s[4]), float(s[5])
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0 and 0.0 <= z <= 1.0):
        raise SolverAbortError(f"ball position outside unit cube: ({x}, {y}, {z})")
    g = p.gravity
    e = p.restitution
    h = p.dt / p.substeps
    for _ in range(p.substeps):
        vz += g * h
        x += vx * h
        y += vy * h
        z += vz * h
        # walls resolved in axis order x, y, z
        if x < 0.0:
            x = 0.0
            vx = -e * vx
        elif x > 1.0:
            x = 1.0
            vx = -e * vx
        if y < 0.0:
            y = 0.0
            vy = -e * vy
        elif y > 1.0:
            y = 1.0
            vy = -e * vy
        if z < 0.0:
            z = 0.0
            vz = -e * vz
        elif z > 1.0:
            z = 1.0
            vz = -e * vz
    out = s.copy()
    out[0:6] = (x, y, z, vx, vy, vz)
    return out


def initial_state(rng):
    """Interior position, speed uniform in [1,3] m/s, angular velocity in [-5,5]^3."""
    pos = rng.uniform(0.2, 0.8, size=3)
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    speed = rng.uniform(1.0, 3.0)
    omega = rng.uniform(-5.0, 5.0, size=3)
    return np.concatenate([pos, speed * direction, omega]).astype(np.float64)


def mechanical_energy(state, gravity):
    """E = 0.5*|v|^2 + |g|*z for a unit-mass ball."""
    v = np.asarray(state[3:6], dtype=np.float64)
    return 0.5 * float(v @ v) + abs(gravity) * float(state[2])
