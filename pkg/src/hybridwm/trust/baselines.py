"""Label-free baseline trust signals: ensembles, TTA, gradient magnitude,
and the Ball-3D conservation residuals."""

import numpy as np

from ..data.norm import normalize
from ..errors import NotApplicableError


def ensemble_score(models, state, horizon):
    """Mean over cells of the per-cell population std across member predictions."""
    if len(models) < 2:
        raise ValueError(f"an ensemble needs K >= 2 members, got {len(models)}")
    s = normalize(np.asarray(state, dtype=np.float32), models[0].norm)
    preds = np.stack([m.predict_norm(s, horizon) for m in models]).astype(np.float64)
    return float(preds.std(axis=0).mean())


def tta_score(model, state, horizon, k=8, sigma=0.01, rng=None):
    """Std of predictions over k noisy input replicas, sigma in normalized units."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    rng = rng if rng is not None else np.random.default_rng(0)
    s = normalize(np.asarray(state, dtype=np.float32), model.norm)
    preds = []
    for _ in range(k):
        noisy = s + (sigma * rng.standard_normal(s.shape)).astype(np.float32)
        preds.append(model.predict_norm(noisy, horizon))
    preds = np.stack(preds).astype(np.float64)
    return float(preds.std(axis=0).mean())


def grad_mag_score(state):
    """Mean over cells of the spatial gradient magnitude summed over channels.

    Central differences in the interior, one-sided at the boundary. Undefined
    for non-spatial states (Ball 3D): raises NotApplicableError.
    """
    s = np.asarray(state, dtype=np.float64)
    if s.ndim < 3:
        raise NotApplicableError("gradient magnitude needs a spatial (C,H,W) state")
    gy, gx = np.gradient(s, axis=(-2, -1))
    mag = np.sqrt(gx * gx + gy * gy).sum(axis=-3)
    return float(mag.mean())


def _require_ball(state):
    s = np.asarray(state, dtype=np.float64)
    if s.ndim != 1 or s.shape[0] != 9:
        raise NotApplicableError("conservation residuals are defined for the 9-vector ball state")
    return s


def energy_residual(s0, s_pred, gravity):
    """|E(pred) - E(s0)| with E = 0.5|v|^2 + |g| z (unit mass)."""
    a = _require_ball(s0)
    b = _require_ball(s_pred)
    g = abs(gravity)

    def energy(s):
        return 0.5 * float(s[3:6] @ s[3:6]) + g * float(s[2])

    return abs(energy(b) - energy(a))


def momentum_residual(s0, s_pred):
    """||p(pred) - p(s0)||_2 with p = v (unit mass)."""
    a = _require_ball(s0)
    b = _require_ball(s_pred)
    return float(np.linalg.norm(b[3:6] - a[3:6]))
