"""Oregonator reaction-diffusion on a periodic square grid.

Two-variable Tyson kinetics:

    eps * du/dt = u - u^2 - f * v * (u - q) / (u + q)
          dv/dt = u - v

with diffusion D * laplacian on both channels. One frame advance is a Strang
split: implicit-Euler reaction over dt/2 (per-cell Newton, vectorised over the
grid), FTCS diffusion over dt with internal stability substepping, implicit
reaction over dt/2 again. Internal arithmetic is float64.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import SolverAbortError

ENV_ID = 0
CHANNELS = 2

NEWTON_TOL = 1e-10
NEWTON_MAX_ITERS = 50
FTCS_LIMIT = 0.25


@dataclass(frozen=True)
class OregonatorParams:
    eps_kin: float = 0.05
    q_kin: float = 0.002
    f_kin: float = 2.0
    D: float = 1.0
    dt: float = 0.05
    grid: int = 64
    domain: float = 16.0       # physical edge length; dx = domain / grid

    def __post_init__(self):
        if self.eps_kin <= 0 or self.q_kin <= 0 or self.D < 0:
            raise ValueError("eps_kin, q_kin must be positive and D non-negative")

    @property
    def dx(self):
        return self.domain / self.grid


def reaction_rate(u, v, p):
    """Tyson kinetics (du/dt, dv/dt)."""
    ru = (u - u * u - p.f_kin * v * (u - p.q_kin) / (u + p.q_kin)) / p.eps_kin
    rv = u - v
    return ru, rv


def _reaction_half(u, v, h, p):
    """Implicit Euler over h: solve w = w0 + h*R(w) by Newton. Returns (u, v, iters, res).

    The v-equation of the implicit step is linear, so v' = (v0 + h*u')/(1+h) is
    substituted and the remaining scalar equation in u' is solved per cell by
    Newton with a bisection bracket (the iteration must never cross the
    u' = -q_kin pole). The bracket safeguard changes only the iterate path; the
    accepted solution is certified by the residual alone.
    """
    u0, v0 = u, v
    eps, q, f = p.eps_kin, p.q_kin, p.f_kin
    he = h / eps
    dv_du = h / (1.0 + h)

    def g_of(un):
        vn = (v0 + h * un) / (1.0 + h)
        inner = un - un * un - f * vn * (un - q) / (un + q)
        return un - u0 - he * inner, vn

    lo = np.zeros_like(u0)
    hi = np.maximum(2.0, 2.0 * u0)
    ghi, _ = g_of(hi)
    for _ in range(60):
        bad = ghi <= 0.0
        if not bad.any():
            break
        hi = np.where(bad, hi * 2.0, hi)
        ghi, _ = g_of(hi)
    else:
        cell = int(np.argmax(ghi <= 0.0))
        raise SolverAbortError("reaction bracket expansion failed", cell=cell)

    un = u0.copy()
    res = np.inf
    for it in range(1, NEWTON_MAX_ITERS + 1):
        gu, vn = g_of(un)
        res = float(np.max(np.abs(gu)))
        if res < NEWTON_TOL:
            return un, vn, it, res
        lo = np.where(gu < 0.0, un, lo)
        hi = np.where(gu > 0.0, un, hi)
        s = un + q
        d_inner = 1.0 - 2.0 * un - f * (dv_du * (un - q) / s + vn * 2.0 * q / (s * s))
        dg = 1.0 - he * d_inner
        step = np.divide(gu, dg, out=np.zeros_like(gu), where=dg != 0.0)
        cand = un - step
        mid = 0.5 * (lo + hi)
        un = np.where((cand > lo) & (cand < hi) & (dg != 0.0), cand, mid)
    gu, _ = g_of(un)
    cell = int(np.argmax(np.abs(gu)))
    raise SolverAbortError(
        f"reaction Newton did not converge (residual {res:.3e}) at cell {cell}", cell=cell
    )


def _diffuse(w, p):
    """FTCS with periodic wrap, substepped to the stability limit."""
    if p.D == 0.0:
        return w
    limit = FTCS_LIMIT * p.dx * p.dx / p.D
    n = int(np.ceil(p.dt / limit))
    h = p.dt / n
    r = p.D * h / (p.dx * p.dx)
    for _ in range(n):
        lap = (
            np.roll(w, 1, axis=-1) + np.roll(w, -1, axis=-1)
            + np.roll(w, 1, axis=-2) + np.roll(w, -1, axis=-2)
            - 4.0 * w
        )
        w = w + r * lap
    return w


def oregonator_step(field, p):
    state, _ = oregonator_step_diagnostics(field, p)
    return state


def oregonator_step_diagnostics(field, p):
    """Advance one frame; also return (max Newton iters, max residual) seen."""
    w = np.asarray(field, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise SolverAbortError("non-finite input field")
    u, v = w[0], w[1]
    h = p.dt / 2.0
    u, v, it1, r1 = _reaction_half(u, v, h, p)
    uv = _diffuse(np.stack([u, v]), p)
    u, v, it2, r2 = _reaction_half(uv[0], uv[1], h, p)
    return np.stack([u, v]), (max(it1, it2), max(r1, r2))


def homogeneous_root(p, lo=1e-6, hi=1.0, tol=1e-13):
    """Positive root of the spatially uniform steady state (v = u) by bisection."""
    def g(u):
        return u - u * u - p.f_kin * u * (u - p.q_kin) / (u + p.q_kin)

    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0:
        raise ValueError("no sign change on the bisection bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(lo) * g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# -- initial conditions ---------------------------------------------------


def _blur_periodic(w, sigma):
    from scipy.ndimage import gaussian_filter

    return gaussian_filter(w, sigma=sigma, mode="wrap")


def initial_state(p, kind, rng):
    """kind: 'spiral' | 'target' | 'random' | 'mix' (50/30/20 mixture)."""
    if kind == "mix":
        r = rng.random()
        kind = "spiral" if r < 0.5 else ("target" if r < 0.8 else "random")
    n = p.grid
    ustar = homogeneous_root(p)
    centers = (np.arange(n) + 0.5) * p.dx
    xx = centers[None, :]
    yy = centers[:, None]
    if kind == "spiral":
        cx = rng.uniform(0.3, 0.7) * p.domain
        cy = rng.uniform(0.3, 0.7) * p.domain
        phase = np.arctan2(yy - cy, xx - cx)
        u = ustar * (1.0 + 0.8 * np.cos(phase))
        v = ustar * (1.0 + 0.8 * np.sin(phase))
    elif kind == "target":
        cx = rng.uniform(0.3, 0.7) * p.domain
        cy = rng.uniform(0.3, 0.7) * p.domain
        r2 = (xx - cx) ** 2 + (yy - cy) ** 2
        width = (0.08 * p.domain) ** 2
        u = ustar + 0.6 * np.exp(-r2 / (2.0 * width))
        v = np.full((n, n), 0.8 * ustar)
    elif kind == "random":
        u = ustar * (0.4 + 1.2 * rng.random((n, n)))
        v = ustar * (0.4 + 1.2 * rng.random((n, n)))
        u = _blur_periodic(u, 3.0)
        v = _blur_periodic(v, 3.0)
    else:
        raise ValueError(f"unknown oregonator initial-condition kind {kind!r}")
    u = np.clip(u, 1e-4, 1.0)
    v = np.clip(v, 1e-4, 1.0)
    return np.stack([u, v])
