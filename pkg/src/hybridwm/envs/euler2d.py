"""2D compressible Euler equations: first-order Godunov with HLL fluxes.

State layout is conserved variables (rho, rho*u, rho*v, E) on a square grid
over the unit square, channel-major (4, H, W). Wave speeds use the Davis
estimates. Ghost cells implement transmissive (zero-gradient) or periodic
boundaries. One `euler_step` call advances exactly one frame interval,
substepping at the CFL limit and clipping the last substep onto the frame
boundary. Internal arithmetic is float64.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import SolverAbortError

ENV_ID = 1
CHANNELS = 4


@dataclass(frozen=True)
class EulerParams:
    gamma: float = 1.4
    cfl: float = 0.4
    grid: int = 64
    bc: str = "transmissive"   # "transmissive" | "periodic"
    dt_frame: float = 2e-3

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        if not 0.0 < self.cfl < 1.0:
            raise ValueError("cfl must be in (0, 1)")
        if self.bc not in ("transmissive", "periodic"):
            raise ValueError(f"unknown boundary mode {self.bc!r}")

    @property
    def dx(self):
        return 1.0 / self.grid


def primitives(q, gamma):
    """(rho, u, v, p) from conserved variables; raises on non-physical cells."""
    rho = q[0]
    if np.any(rho <= 0.0):
        cell = np.unravel_index(int(np.argmin(rho)), rho.shape)
        raise SolverAbortError(f"non-positive density at cell {cell}", cell=cell)
    u = q[1] / rho
    v = q[2] / rho
    p = (gamma - 1.0) * (q[3] - 0.5 * rho * (u * u + v * v))
    if np.any(p <= 0.0):
        cell = np.unravel_index(int(np.argmin(p)), p.shape)
        raise SolverAbortError(f"non-positive pressure at cell {cell}", cell=cell)
    return rho, u, v, p


def physical_flux(q, gamma, axis):
    """Exact flux F(q) along axis 0 (x) or 1 (y); q is (4, ...)."""
    rho, u, v, p = primitives(q, gamma)
    un = u if axis == 0 else v
    f = np.empty_like(q)
    f[0] = rho * un
    f[1] = q[1] * un + (p if axis == 0 else 0.0)
    f[2] = q[2] * un + (p if axis == 1 else 0.0)
    f[3] = (q[3] + p) * un
    return f


def hll_flux(qL, qR, axis, gamma=1.4):
    """HLL flux with Davis wave-speed estimates; works on (4,) or (4, ...) arrays."""
    qL = np.asarray(qL, dtype=np.float64)
    qR = np.asarray(qR, dtype=np.float64)
    rhoL, uL, vL, pL = primitives(qL, gamma)
    rhoR, uR, vR, pR = primitives(qR, gamma)
    cL = np.sqrt(gamma * pL / rhoL)
    cR = np.sqrt(gamma * pR / rhoR)
    unL = uL if axis == 0 else vL
    unR = uR if axis == 0 else vR
    sL = np.minimum(unL - cL, unR - cR)
    sR = np.maximum(unL + cL, unR + cR)
    fL = physical_flux(qL, gamma, axis)
    fR = physical_flux(qR, gamma, axis)
    middle = (sR * fL - sL * fR + sL * sR * (qR - qL)) / (sR - sL)
    flux = np.where(sL >= 0.0, fL, np.where(sR <= 0.0, fR, middle))
    return flux


def _pad(q, bc):
    if bc == "periodic":
        return np.pad(q, ((0, 0), (1, 1), (1, 1)), mode="wrap")
    return np.pad(q, ((0, 0), (1, 1), (1, 1)), mode="edge")


def _substep(q, p, dt_cap):
    """One CFL-limited update; returns (q_new, dt_taken)."""
    rho, u, v, prs = primitives(q, p.gamma)
    c = np.sqrt(p.gamma * prs / rho)
    dx = p.dx
    dt = p.cfl * min(dx / float(np.max(np.abs(u) + c)), dx / float(np.max(np.abs(v) + c)))
    dt = min(dt, dt_cap)
    qp = _pad(q, p.bc)
    fx = hll_flux(qp[:, 1:-1, :-1], qp[:, 1:-1, 1:], axis=0, gamma=p.gamma)  # (4,H,W+1)
    fy = hll_flux(qp[:, :-1, 1:-1], qp[:, 1:, 1:-1], axis=1, gamma=p.gamma)  # (4,H+1,W)
    qn = q - (dt / dx) * (fx[:, :, 1:] - fx[:, :, :-1]) - (dt / dx) * (fy[:, 1:, :] - fy[:, :-1, :])
    return qn, dt


def euler_step(field, p):
    """Advance exactly one frame interval. Returns (state, dt_taken)."""
    q = np.asarray(field, dtype=np.float64)
    remaining = p.dt_frame
    while remaining > 0.0:
        q, taken = _substep(q, p, remaining)
        remaining -= taken
    primitives(q, p.gamma)  # positivity check; aborts loudly on vacuum
    return q, p.dt_frame


def substep_count(field, p):
    """Substeps one frame advance would take (for benchmarking diagnostics)."""
    q = np.asarray(field, dtype=np.float64)
    n = 0
    remaining = p.dt_frame
    while remaining > 0.0:
        q, taken = _substep(q, p, remaining)
        n += 1
        remaining -= taken
    return n


# -- initial conditions ---------------------------------------------------

# Canonical four-quadrant Riemann configurations (rho, u, v, p) ordered
# (Q1: x>x0,y>y0), (Q2: x<x0,y>y0), (Q3: x<x0,y<y0), (Q4: x>x0,y<y0).
SCHULZ_RINNE_CONFIGS = (
    ((1.5, 0.0, 0.0, 1.5),
     (0.5323, 1.206, 0.0, 0.3),
     (0.138, 1.206, 1.206, 0.029),
     (0.5323, 0.0, 1.206, 0.3)),
    ((1.1, 0.0, 0.0, 1.1),
     (0.5065, 0.8939, 0.0, 0.35),
     (1.1, 0.8939, 0.8939, 1.1),
     (0.5065, 0.0, 0.8939, 0.35)),
    ((1.0, 0.75, -0.5, 1.0),
     (2.0, 0.75, 0.5, 1.0),
     (1.0, -0.75, 0.5, 1.0),
     (3.0, -0.75, -0.5, 1.0)),
    ((0.5313, 0.0, 0.0, 0.4),
     (1.0, 0.7276, 0.0, 1.0),
     (0.8, 0.0, 0.0, 1.0),
     (1.0, 0.0, 0.7276, 1.0)),
)

SEDOV_BACKGROUND_P = 1e-3
SEDOV_RADIUS_CELLS = 3.0


def _conserved(rho, u, v, p, gamma):
    return np.array(
        [rho, rho * u, rho * v, p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)],
        dtype=np.float64,
    )


def sedov_state(p, e0, rho_bg):
    """Point-energy deposition, normalised so the energy above background is e0."""
    n = p.grid
    q = np.zeros((4, n, n), dtype=np.float64)
    q[0] = rho_bg
    q[3] = SEDOV_BACKGROUND_P / (p.gamma - 1.0)
    yy, xx = np.mgrid[0:n, 0:n]
    r2 = (xx - (n - 1) / 2.0) ** 2 + (yy - (n - 1) / 2.0) ** 2
    disk = r2 <= SEDOV_RADIUS_CELLS**2
    cell_area = p.dx * p.dx
    q[3][disk] += e0 / (int(disk.sum()) * cell_area)
    return q


def schulz_rinne_state(p, config_index, x0=0.5, y0=0.5):
    n = p.grid
    quads = SCHULZ_RINNE_CONFIGS[config_index]
    centers = (np.arange(n) + 0.5) * p.dx
    xx = centers[None, :]
    yy = centers[:, None]
    q = np.zeros((4, n, n), dtype=np.float64)
    masks = (
        (xx >= x0) & (yy >= y0),
        (xx < x0) & (yy >= y0),
        (xx < x0) & (yy < y0),
        (xx >= x0) & (yy < y0),
    )
    for mask, prim in zip(masks, quads):
        q[:, mask] = _conserved(*prim, p.gamma)[:, None]
    return q


def initial_state(p, kind, rng, e0=1.0, rho_bg=1.0, interface_jitter=0.0):
    """kind: 'sedov' | 'schulz_rinne' | 'mix'. Jitter shifts the quadrant interface."""
    if kind == "mix":
        kind = "sedov" if rng.random() < 0.5 else "schulz_rinne"
    if kind == "sedov":
        return sedov_state(p, e0, rho_bg)
    if kind == "schulz_rinne":
        idx = int(rng.integers(len(SCHULZ_RINNE_CONFIGS)))
        x0 = y0 = 0.5
        if interface_jitter > 0.0:
            x0 = 0.5 + rng.uniform(-interface_jitter, interface_jitter)
            y0 = 0.5 + rng.uniform(-interface_jitter, interface_jitter)
        return schulz_rinne_state(p, idx, x0, y0)
    raise ValueError(f"unknown euler initial-condition kind {kind!r}")


def totals(q, dx):
    """Per-channel domain integrals (mass, x/y momentum, energy)."""
    return np.asarray(q, dtype=np.float64).sum(axis=(1, 2)) * dx * dx
