"""Command implementations behind the CLI.

Artifact layout under the output directory:

    resolved_config.json
    data/<env>/<split>/*.hwm + manifest.json
    checkpoints/surrogate_<mode>.hwmm, curves_<mode>.csv
    trust/scores.csv
    deploy/deploy.csv, q_sweep.csv
    eval/cells.csv, closed_loop.csv, beyond_tmax.csv
    bench/records.csv
    render/*.pgm + sidecars
    ablate/dagger_sweep.csv
"""

import os

import numpy as np

from . import data as datamod
from . import deploy as deploymod
from . import envs, evalbench, trust
from .data.generate import MANIFEST_NAME
from .errors import ConfigError, MissingPrerequisiteError
from .surrogate import read_checkpoint, write_checkpoint
from .train import TrainConfig, train, write_curves

MODE_TAGS = {"supervised": "supervised", "self-consistency": "sc", "single-horizon": "single"}


def _env_name(cfg):
    return cfg["env"]["name"]


def _env_fields(cfg):
    return {k: v for k, v in cfg["env"].items() if k != "name"}


def _split_spec(cfg, split):
    return datamod.SplitSpec(
        env=_env_name(cfg),
        split=split,
        count=cfg["data"]["counts"][split],
        seed_start=cfg["data"]["seed_offsets"][split],
        frames=cfg["data"]["frames"],
        root_seed=cfg["seed"],
        env_fields=_env_fields(cfg),
    )


def _split_path(cfg, out_dir, split):
    return os.path.join(out_dir, "data", _env_name(cfg), split)


def _require_split(cfg, out_dir, split):
    path = os.path.join(_split_path(cfg, out_dir, split), MANIFEST_NAME)
    if not os.path.exists(path):
        raise MissingPrerequisiteError(f"split {split!r} not generated; run `gen` first")
    return _split_path(cfg, out_dir, split)


def _load_split(cfg, out_dir, split):
    env_id = envs.ENV_IDS[_env_name(cfg)]
    return datamod.load_split(_require_split(cfg, out_dir, split), expect_env_id=env_id)


def _ckpt_path(cfg, out_dir, mode=None):
    tag = MODE_TAGS[mode or cfg["train"]["mode"]]
    return os.path.join(out_dir, "checkpoints", f"surrogate_{tag}.hwmm")


def _require_ckpt(cfg, out_dir, mode="supervised"):
    path = _ckpt_path(cfg, out_dir, mode)
    if not os.path.exists(path):
        raise MissingPrerequisiteError(f"checkpoint {path} missing; run `train` first")
    return read_checkpoint(path)


def _scores_path(out_dir):
    return os.path.join(out_dir, "trust", "scores.csv")


def _require_scores(out_dir):
    path = _scores_path(out_dir)
    if not os.path.exists(path):
        raise MissingPrerequisiteError("trust score table missing; run `trust` first")
    return trust.read_table(path)


def _train_config(cfg, dagger_lambda=None, mode=None):
    t = cfg["train"]
    mode = mode or t["mode"]
    ladder = tuple(t["ladder"])
    loss_mode = "supervised"
    lam = t["dagger_lambda"] if dagger_lambda is None else dagger_lambda
    if mode == "single-horizon":
        ladder = (max(ladder),)
    elif mode == "self-consistency":
        loss_mode = "self-consistency"
        lam = 0.0
    return TrainConfig(
        env=_env_name(cfg), arch=t["arch"], ladder=ladder,
        batch_size=t["batch_size"], samples_per_epoch=t["samples_per_epoch"],
        epochs=t["epochs"], lr=t["lr"], weight_decay=t["weight_decay"],
        clip=t["clip"], warmup_epochs=t["warmup_epochs"], dagger_lambda=lam,
        patience=t["patience"], seed=cfg["seed"], loss_mode=loss_mode,
        val_pairs=t["val_pairs"],
    )


# -- commands ---------------------------------------------------------------


def cmd_gen(cfg, out_dir):
    specs = [_split_spec(cfg, s) for s in datamod.SPLITS]
    datamod.check_disjoint(specs)
    for spec in specs:
        manifest = datamod.generate_split(spec, _split_path(cfg, out_dir, spec.split))
        failed = sum(1 for e in manifest["files"] if e["status"] != "ok")
        print(f"gen {spec.env}/{spec.split}: {spec.count - failed}/{spec.count} ok")


def cmd_train(cfg, out_dir, mode=None, dagger_lambda=None, tag=None):
    mode = mode or cfg["train"]["mode"]
    train_trajs = _load_split(cfg, out_dir, "train")
    val_trajs = _load_split(cfg, out_dir, "val")
    tc = _train_config(cfg, dagger_lambda=dagger_lambda, mode=mode)
    result = train(tc, train_trajs, val_trajs)
    os.makedirs(os.path.join(out_dir, "checkpoints"), exist_ok=True)
    tag = tag or MODE_TAGS[mode]
    ckpt = os.path.join(out_dir, "checkpoints", f"surrogate_{tag}.hwmm")
    write_checkpoint(result.surrogate, ckpt)
    write_curves(result.curves, os.path.join(out_dir, "checkpoints", f"curves_{tag}.csv"))
    print(
        f"train[{mode}] best val MSE {result.best_val_mse:.6f} at epoch {result.best_epoch} "
        f"(identity baseline {result.identity_mse:.6f})"
    )
    return result


def cmd_trust(cfg, out_dir):
    model = _require_ckpt(cfg, out_dir)
    horizons = [int(t) for t in cfg["trust"]["horizons"]]
    methods = list(cfg["trust"]["methods"])
    options = {
        "seed": cfg["seed"],
        "tta_k": cfg["trust"]["tta_k"],
        "tta_sigma": cfg["trust"]["tta_sigma"],
    }
    head = None
    if "error_head" in methods:
        head = trust.fit_error_head(
            model, _load_split(cfg, out_dir, "train"), horizons, cfg["seed"],
            max_trajs=cfg["trust"]["head_max_trajs"], seed=cfg["seed"],
        )
    rows = []
    val_queries = None
    conformal = None
    for split in ("val", "test", "ood-near", "ood-far"):
        trajs = _load_split(cfg, out_dir, split)
        queries = trust.base_queries(model, trajs, split, horizons, cfg["seed"])
        if split == "val":
            val_queries = queries
            if "conformal" in methods:
                conformal = trust.build_conformal(model, val_queries, k=cfg["trust"]["conformal_k"])
        solver_params = [envs.params_from_dict(t.env_id, t.params) for t in trajs]
        rows.extend(trust.score_rows(
            model, queries, methods, options,
            head=head, conformal=conformal, solver_params=solver_params,
        ))
        if split == "test" and cfg["trust"]["richardson_horizons"]:
            sub = trajs[: cfg["trust"]["richardson_max_trajs"]]
            rich_h = [int(t) for t in cfg["trust"]["richardson_horizons"]]
            rich_queries = [
                q for q in trust.base_queries(model, sub, split, rich_h, cfg["seed"])
            ]
            rows.extend(trust.score_rows(
                model, rich_queries, ["richardson_fix", "richardson_prod"], options,
                solver_params=solver_params,
            ))
    os.makedirs(os.path.join(out_dir, "trust"), exist_ok=True)
    trust.write_table(rows, _scores_path(out_dir))
    print(f"trust: {len(rows)} score rows")


def cmd_deploy(cfg, out_dir):
    model = _require_ckpt(cfg, out_dir)
    rows = _require_scores(out_dir)
    horizon = int(cfg["deploy"]["horizon"])
    val_rows = trust.select(rows, split="val", horizon=horizon, method="step_doubling")
    if not val_rows:
        raise MissingPrerequisiteError("no validation step-doubling scores; rerun `trust`")
    val_scores = [r["score"] for r in val_rows]
    test_trajs = _load_split(cfg, out_dir, "test")
    batch = deploymod.make_batch(test_trajs, "test", horizon, cfg["seed"], _env_name(cfg))
    q = float(cfg["deploy"]["q_default"])
    gate = deploymod.GateConfig(
        q=q, tau=deploymod.calibrate_tau(val_scores, q),
        calibration_split="val", horizon=horizon,
    )
    result = deploymod.run_mode2(model, batch, horizon, gate)
    os.makedirs(os.path.join(out_dir, "deploy"), exist_ok=True)
    deploymod.write_deploy_csv(result.rows, os.path.join(out_dir, "deploy", "deploy.csv"))
    sweep = deploymod.q_sweep(model, batch, horizon, val_scores, cfg["deploy"]["q_values"])
    evalbench.write_csv(
        sweep,
        ("q", "tau", "split", "horizon", "reduction", "floor", "deferral_fraction",
         "mode1_rmse", "mode2_rmse"),
        os.path.join(out_dir, "deploy", "q_sweep.csv"),
    )
    print(
        f"deploy h={horizon} q={q}: mode1 {result.mode1_rmse:.5f} -> mode2 {result.mode2_rmse:.5f} "
        f"({result.reduction:.1%} reduction, floor {deploymod.random_floor(q):.0%}, "
        f"deferred {result.deferred}/{result.kept + result.deferred})"
    )
    return result


def cmd_eval(cfg, out_dir):
    rows = _require_scores(out_dir)
    model = _require_ckpt(cfg, out_dir)
    env = _env_name(cfg)
    ev = cfg["eval"]
    cells = []
    combos = sorted({(r["split"], r["horizon"], r["method"]) for r in rows})
    for split, horizon, method in combos:
        sel = trust.select(rows, split=split, horizon=horizon, method=method)
        try:
            cell = evalbench.eval_cell(
                sel, ev["percentile"], ev["bootstrap_resamples"], ev["bootstrap_level"],
                seed=cfg["seed"],
            )
        except Exception:
            continue  # degenerate cells (single class, too few rows) are skipped
        cell.update({"env": env, "split": split, "horizon": horizon, "method": method})
        cells.append(cell)
    os.makedirs(os.path.join(out_dir, "eval"), exist_ok=True)
    evalbench.write_csv(cells, evalbench.EVAL_COLUMNS, os.path.join(out_dir, "eval", "cells.csv"))

    test_trajs = _load_split(cfg, out_dir, "test")
    cl_rows = []
    for idx, traj in enumerate(test_trajs[: ev["closed_loop_trajs"]]):
        params = envs.params_from_dict(traj.env_id, traj.params)
        rmses = evalbench.closed_loop(
            model, params, traj.frames[0], ev["closed_loop_ks"], ev["closed_loop_horizon"]
        )
        for k, rmse in rmses.items():
            cl_rows.append({"traj_id": idx, "k": k, "horizon": ev["closed_loop_horizon"], "rmse": rmse})
    evalbench.write_csv(
        cl_rows, ("traj_id", "k", "horizon", "rmse"),
        os.path.join(out_dir, "eval", "closed_loop.csv"),
    )

    beyond = evalbench.beyond_tmax(
        model, test_trajs, "test", ev["beyond_tmax"], cfg["seed"],
        ev["percentile"], ev["bootstrap_resamples"], ev["bootstrap_level"],
    )
    for cell in beyond:
        cell["env"] = env
    evalbench.write_csv(
        beyond, evalbench.EVAL_COLUMNS, os.path.join(out_dir, "eval", "beyond_tmax.csv")
    )
    print(f"eval: {len(cells)} cells, {len(cl_rows)} closed-loop rows, {len(beyond)} beyond-Tmax cells")


def cmd_bench(cfg, out_dir):
    model = _require_ckpt(cfg, out_dir)
    test_trajs = _load_split(cfg, out_dir, "test")
    traj = test_trajs[0]
    params = envs.params_from_dict(traj.env_id, traj.params)
    threads = cfg["bench"]["threads"] or evalbench.current_threads()
    records = evalbench.bench_walltime(
        model, params, traj.frames[0], cfg["bench"]["horizons"],
        repeats=cfg["bench"]["repeats"], warmup=cfg["bench"]["warmup"], threads=threads,
    )
    rows = [r.as_row() for r in records]
    for row in rows:
        evalbench.validate_record(row)
    os.makedirs(os.path.join(out_dir, "bench"), exist_ok=True)
    evalbench.write_csv(rows, evalbench.BENCH_COLUMNS, os.path.join(out_dir, "bench", "records.csv"))
    for r in records:
        print(
            f"bench h={r.horizon}: surrogate {r.surrogate_seconds * 1e3:.2f} ms, "
            f"solver {r.solver_seconds * 1e3:.2f} ms ({r.speedup:.1f}x, threads={r.threads})"
        )


def cmd_render(cfg, out_dir):
    model = _require_ckpt(cfg, out_dir)
    env = _env_name(cfg)
    if env == "ball":
        raise ConfigError("render dumps per-cell maps; the ball state is non-spatial")
    test_trajs = _load_split(cfg, out_dir, "test")
    traj = test_trajs[cfg["render"]["traj_index"]]
    channel = cfg["render"]["channel"]
    rdir = os.path.join(out_dir, "render")
    os.makedirs(rdir, exist_ok=True)
    for horizon in cfg["render"]["horizons"]:
        start = trust.query_start(cfg["seed"], env, "test", cfg["render"]["traj_index"],
                                  horizon, traj.n_frames)
        s0 = traj.frames[start]
        truth = traj.frames[start + horizon]
        pred = model.predict(s0, horizon)
        emap = trust.step_doubling(model, s0, horizon, allow_extrapolation=True)
        err = np.sqrt(((pred.astype(np.float64) - truth.astype(np.float64)) ** 2).sum(axis=0))
        prefix = os.path.join(rdir, f"{env}_h{horizon}")
        evalbench.render_error_map(s0[channel], f"{prefix}_input.pgm")
        evalbench.render_error_map(truth[channel], f"{prefix}_truth.pgm")
        evalbench.render_error_map(pred[channel], f"{prefix}_pred.pgm")
        evalbench.render_shared_pair(
            emap.values, err,
            f"{prefix}_emap.pgm", f"{prefix}_true_err.pgm",
            f"{prefix}_shared_scale.txt",
        )
    print(f"render: wrote five-panel dumps for horizons {cfg['render']['horizons']}")


def cmd_ablate(cfg, out_dir):
    rows = []
    for lam in (0.0, 0.1, 1.0):
        result = cmd_train(cfg, out_dir, mode="supervised", dagger_lambda=lam,
                           tag=f"dagger{lam:g}")
        rows.append({
            "dagger_lambda": lam,
            "best_val_mse": result.best_val_mse,
            "best_epoch": result.best_epoch,
            "identity_mse": result.identity_mse,
        })
    os.makedirs(os.path.join(out_dir, "ablate"), exist_ok=True)
    evalbench.write_csv(
        rows, ("dagger_lambda", "best_val_mse", "best_epoch", "identity_mse"),
        os.path.join(out_dir, "ablate", "dagger_sweep.csv"),
    )
    print("ablate: " + ", ".join(f"lambda={r['dagger_lambda']:g}: {r['best_val_mse']:.5f}" for r in rows))


FULL_PIPELINE = ("gen", "train", "trust", "deploy", "eval")


def run_pipeline(cfg, out_dir, commands=FULL_PIPELINE):
    """Programmatic driver used by tests and demos."""
    import sys

    this = sys.modules[__name__]
    for name in commands:
        getattr(this, f"cmd_{name}")(cfg, out_dir)
