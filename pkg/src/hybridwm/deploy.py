"""Two-mode deployment: surrogate-only, and trust-gated deferral to the solver.

The gate keeps a trajectory on the surrogate iff its error-map aggregate is at
most tau, where tau is the nearest-rank q-quantile of validation scores (never
test scores). Deferred trajectories are recomputed by the reference solver and
therefore carry zero error against the stored ground truth by construction.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import envs
from .errors import ConfigError, SolverAbortError
from .trust.errormap import aggregate, step_doubling


def calibrate_tau(val_scores, q):
    """Nearest-rank quantile: index ceil(q*n) - 1 of the ascending sort.

    q = 0 yields -inf (defer everything); q = 1 yields the max score.
    """
    scores = sorted(float(s) for s in val_scores)
    if not scores:
        raise ConfigError("cannot calibrate tau from an empty score list")
    if not 0.0 <= q <= 1.0:
        raise ConfigError(f"surrogate-keep fraction q={q} outside [0, 1]")
    idx = math.ceil(q * len(scores)) - 1
    if idx < 0:
        return float("-inf")
    return scores[min(idx, len(scores) - 1)]


@dataclass(frozen=True)
class GateConfig:
    q: float
    tau: float
    calibration_split: str
    horizon: int


@dataclass
class DeploymentResult:
    rows: list = field(default_factory=list)
    mode1_rmse: float = float("nan")
    mode2_rmse: float = float("nan")
    deferral_fraction: float = 0.0
    kept: int = 0
    deferred: int = 0
    failed: int = 0
    surrogate_seconds: float = 0.0
    solver_seconds: float = 0.0

    @property
    def reduction(self):
        if self.mode1_rmse == 0.0:
            return 0.0
        return 1.0 - self.mode2_rmse / self.mode1_rmse


def _rmse(a, b):
    return float(np.sqrt(np.mean((np.asarray(a, np.float64) - np.asarray(b, np.float64)) ** 2)))


def make_batch(trajs, split, horizon, root_seed, env_name):
    """Deployment batch with the same deterministic query starts as trust scoring."""
    from .trust.scoring import query_start

    batch = []
    for idx, traj in enumerate(trajs):
        start = query_start(root_seed, env_name, split, idx, horizon, traj.n_frames)
        batch.append({
            "traj_id": idx, "split": split, "start": start,
            "s0": traj.frames[start], "truth": traj.frames[start + horizon],
            "params": envs.params_from_dict(traj.env_id, traj.params),
        })
    return batch


def run_mode1(model, batch, horizon):
    """One forward pass per trajectory; RMSE in raw state space."""
    result = DeploymentResult()
    rmses = []
    for item in batch:
        t0 = time.perf_counter()
        pred = model.predict(item["s0"], horizon)
        dt = time.perf_counter() - t0
        rmse = _rmse(pred, item["truth"])
        rmses.append(rmse)
        result.rows.append({
            "traj_id": item["traj_id"], "split": item["split"], "horizon": horizon,
            "score": float("nan"), "tau": float("nan"), "kept": 1,
            "rmse_mode1": rmse, "rmse_mode2": float("nan"), "source": "surrogate",
            "solver_seconds": 0.0, "surrogate_seconds": dt,
        })
        result.surrogate_seconds += dt
    result.kept = len(batch)
    result.mode1_rmse = float(np.mean(rmses))
    return result


def run_mode2(model, batch, horizon, gate):
    """Trust-gated deferral; records both modes' RMSE on the same batch."""
    if gate.horizon != horizon:
        raise ConfigError(f"gate calibrated at h={gate.horizon}, deployed at h={horizon}")
    result = DeploymentResult()
    m1, m2 = [], []
    for item in batch:
        t0 = time.perf_counter()
        score = aggregate(step_doubling(model, item["s0"], horizon))
        pred = model.predict(item["s0"], horizon)
        t_sur = time.perf_counter() - t0
        rmse1 = _rmse(pred, item["truth"])
        keep = score <= gate.tau
        row = {
            "traj_id": item["traj_id"], "split": item["split"], "horizon": horizon,
            "score": score, "tau": gate.tau, "kept": int(keep),
            "rmse_mode1": rmse1, "solver_seconds": 0.0, "surrogate_seconds": t_sur,
        }
        result.surrogate_seconds += t_sur
        if keep:
            row["rmse_mode2"] = rmse1
            row["source"] = "surrogate"
            result.kept += 1
            m1.append(rmse1)
            m2.append(rmse1)
        else:
            t0 = time.perf_counter()
            try:
                cur = np.asarray(item["s0"], dtype=np.float32)
                for _ in range(horizon):
                    cur = envs.advance_frame(cur.astype(np.float64), item["params"]).astype(np.float32)
            except SolverAbortError as ex:
                row["rmse_mode2"] = float("nan")
                row["source"] = f"failed: {ex}"
                result.failed += 1
                result.rows.append(row)
                continue
            t_sol = time.perf_counter() - t0
            row["solver_seconds"] = t_sol
            result.solver_seconds += t_sol
            rmse2 = _rmse(cur, item["truth"])
            row["rmse_mode2"] = rmse2
            row["source"] = "solver"
            row["solver_state"] = cur
            result.deferred += 1
            m1.append(rmse1)
            m2.append(rmse2)
        result.rows.append(row)
    n = result.kept + result.deferred
    result.deferral_fraction = result.deferred / max(1, n)
    result.mode1_rmse = float(np.mean(m1)) if m1 else float("nan")
    result.mode2_rmse = float(np.mean(m2)) if m2 else float("nan")
    return result


def random_floor(q):
    """Expected relative RMSE reduction of uniformly random deferral.

    Deferred outputs are exact, so deferring a random (1-q) fraction removes
    that fraction of the mean error in expectation.
    """
    return 1.0 - q


def random_deferral_mean(rmses, q, resamples, rng):
    """Monte-Carlo mean reduction of random deferral at the same budget."""
    rmses = np.asarray(rmses, dtype=np.float64)
    n = len(rmses)
    m = int(round((1.0 - q) * n))
    total = rmses.sum()
    if total == 0.0 or m == 0:
        return 0.0
    reductions = np.empty(resamples)
    for i in range(resamples):
        idx = rng.choice(n, size=m, replace=False)
        reductions[i] = rmses[idx].sum() / total
    return float(reductions.mean())


def q_sweep(model, batch, horizon, val_scores, q_values, split="test"):
    """One calibrate+deploy per q; rows of (q, tau, reduction, floor, deferral fraction)."""
    if list(q_values) != sorted(q_values):
        raise ConfigError("q values must be sorted ascending")
    rows = []
    for q in q_values:
        gate = GateConfig(q=q, tau=calibrate_tau(val_scores, q), calibration_split="val", horizon=horizon)
        res = run_mode2(model, batch, horizon, gate)
        rows.append({
            "q": q, "tau": gate.tau, "split": split, "horizon": horizon,
            "reduction": res.reduction, "floor": random_floor(q),
            "deferral_fraction": res.deferral_fraction,
            "mode1_rmse": res.mode1_rmse, "mode2_rmse": res.mode2_rmse,
        })
    return rows


DEPLOY_COLUMNS = (
    "traj_id", "split", "horizon", "score", "tau", "kept",
    "rmse_mode1", "rmse_mode2", "source", "solver_seconds", "surrogate_seconds",
)


def write_deploy_csv(rows, path):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DEPLOY_COLUMNS)
        for r in rows:
            w.writerow([r.get(c, "") for c in DEPLOY_COLUMNS])
