"""Fills the TrustScoreTable for every configured trust method.

Every query is one (trajectory, horizon) pair with a deterministic start index;
the surrogate's raw-space RMSE against the stored ground-truth frame is the
row's true error. Leak hygiene: the learned head is fitted on train-split rows
only, and the conformal calibration set comes from the validation split only.
"""

import time

import numpy as np

from .. import envs
from ..errors import NotApplicableError
from ..rng import rng_for
from .baselines import energy_residual, grad_mag_score, momentum_residual, tta_score, ensemble_score
from .conformal import ConformalScorer
from .errorhead import ErrorHead
from .errormap import aggregate, step_doubling
from .features import pooled_features
from .richardson import richardson_score


def query_start(root_seed, env, split, traj_index, horizon, n_frames):
    rng = rng_for(root_seed, "trust", env, split, traj_index, horizon)
    return int(rng.integers(n_frames - horizon))


def base_queries(model, trajs, split, horizons, root_seed):
    """One query per (trajectory, horizon): start, states, prediction, true RMSE."""
    queries = []
    for idx, traj in enumerate(trajs):
        for t in horizons:
            start = query_start(root_seed, model.env_name, split, idx, t, traj.n_frames)
            s0 = traj.frames[start]
            truth = traj.frames[start + t]
            pred = model.predict(s0, t)
            rmse = float(np.sqrt(np.mean((pred.astype(np.float64) - truth.astype(np.float64)) ** 2)))
            queries.append({
                "traj_id": idx, "split": split, "horizon": t, "start": start,
                "s0": s0, "truth": truth, "pred": pred, "true_rmse": rmse,
            })
    return queries


def fit_error_head(model, train_trajs, horizons, root_seed, max_trajs=40, seed=0):
    trajs = train_trajs[:max_trajs]
    queries = base_queries(model, trajs, "train", horizons, root_seed)
    feats = [pooled_features(q["s0"], model.norm, q["horizon"]) for q in queries]
    head = ErrorHead(n_features=len(feats[0]) - 1, seed=seed)
    head.fit(
        np.stack(feats)[:, :-1],  # horizon enters through its embedding instead
        [q["horizon"] for q in queries],
        [q["true_rmse"] for q in queries],
        ["train"] * len(queries),
    )
    return head


def build_conformal(model, val_queries, k=10):
    feats = np.stack([
        pooled_features(q["s0"], model.norm, q["horizon"]) for q in val_queries
    ])
    return ConformalScorer(feats, [q["true_rmse"] for q in val_queries], k=k)


def score_rows(model, queries, methods, options, head=None, conformal=None,
               solver_params=None, ensemble_models=None):
    """Score every query with every applicable method; returns table rows."""
    rows = []
    for q in queries:
        for method in methods:
            try:
                t0 = time.perf_counter()
                score, cost = _dispatch(
                    method, model, q, options, head, conformal, solver_params, ensemble_models
                )
                if cost is None:
                    cost = time.perf_counter() - t0
            except NotApplicableError:
                continue
            rows.append({
                "traj_id": q["traj_id"], "split": q["split"], "horizon": q["horizon"],
                "method": method, "score": score, "true_rmse": q["true_rmse"],
                "cost_seconds": cost,
            })
    return rows


def _dispatch(method, model, q, options, head, conformal, solver_params, ensemble_models):
    s0, t = q["s0"], q["horizon"]
    if method == "step_doubling":
        return aggregate(step_doubling(model, s0, t)), None
    if method == "tta":
        rng = rng_for(options.get("seed", 0), "tta", q["split"], q["traj_id"], t)
        return tta_score(
            model, s0, t, k=options.get("tta_k", 8),
            sigma=options.get("tta_sigma", 0.01), rng=rng,
        ), None
    if method == "grad_mag":
        from ..data.norm import normalize

        return grad_mag_score(normalize(s0.astype(np.float32), model.norm)), None
    if method == "error_head":
        feats = pooled_features(s0, model.norm, t)[:-1]
        return head.score(feats, t), None
    if method == "conformal":
        return conformal.score(pooled_features(s0, model.norm, t)), None
    if method == "energy":
        g = _gravity_of(q, solver_params)
        return energy_residual(s0, q["pred"], g), None
    if method == "momentum":
        return momentum_residual(s0, q["pred"]), None
    if method == "ensemble":
        return ensemble_score(ensemble_models, s0, t), None
    if method in ("richardson_fix", "richardson_prod"):
        params = solver_params[q["traj_id"]]
        emap, cost = richardson_score(
            params, s0, t, variant=method.split("_")[1],
            order=options.get("richardson_order"),
        )
        return aggregate(emap), cost
    raise ValueError(f"unknown trust method {method!r}")


def _gravity_of(q, solver_params):
    params = solver_params[q["traj_id"]]
    if not isinstance(params, envs.BallParams):
        raise NotApplicableError("energy residual needs ball dynamics")
    return params.gravity
