"""The training loop for all three modes: supervised, self-consistency, single-horizon.

Single-horizon is supervised training with a singleton ladder; the resulting
checkpoint is tagged so the step-doubling probe can refuse it.
"""

from dataclasses import dataclass

import numpy as np

from .. import envs
from ..data.norm import compute_norm_stats, denormalize, normalize
from ..data.pairs import draw_pair, validate_ladder
from ..errors import SolverAbortError
from ..rng import rng_for
from ..surrogate import Surrogate
from ..tnn import AdamWState, SurrogateNet, adamw_step, collect_grads, lr_at, mean_sq
from ..tnn import tensor as tt


@dataclass
class TrainResult:
    surrogate: Surrogate
    curves: list
    best_val_mse: float
    best_epoch: int
    identity_mse: float
    aborted: bool
    dagger_resampled: int


def draw_val_pairs(val_trajs, ladder, count, rng):
    pairs = []
    for _ in range(count):
        ti = int(rng.integers(len(val_trajs)))
        pairs.append(draw_pair(val_trajs[ti], ladder, rng, ti))
    return pairs


def identity_baseline_mse(val_pairs, norm):
    """Mean squared error of predicting no change, in normalized space."""
    errs = [
        float(np.mean((normalize(p.sT, norm) - normalize(p.s0, norm)) ** 2))
        for p in val_pairs
    ]
    return float(np.mean(errs))


def _eval_val_mse(net, norm, val_pairs, batch_size):
    total = 0.0
    for ofs in range(0, len(val_pairs), batch_size):
        chunk = val_pairs[ofs : ofs + batch_size]
        s0 = np.stack([normalize(p.s0, norm) for p in chunk])
        sT = np.stack([normalize(p.sT, norm) for p in chunk])
        ts = [p.horizon for p in chunk]
        out = net.forward(s0, ts)
        total += float(np.mean((out.data - sT) ** 2)) * len(chunk)
    return total / len(val_pairs)


def _identity_probe(net, norm, states, horizon):
    sn = np.stack([normalize(s, norm) for s in states])
    out = net.forward(sn, [horizon] * len(states))
    d = out.data - sn
    return float(np.mean(np.sqrt((d * d).reshape(len(states), -1).sum(axis=1))))


def _dagger_relabel(net, norm, trajs, solver_params, ladder, rng, resampled_counter):
    """One on-policy element: surrogate-visited state, reference-solver label."""
    for _ in range(8):  # resample on solver aborts
        ti = int(rng.integers(len(trajs)))
        src = draw_pair(trajs[ti], ladder, rng, ti)
        t2 = int(ladder[rng.integers(len(ladder))])
        pred = denormalize(
            net.predict(normalize(src.s0.astype(np.float32), norm), src.horizon), norm
        ).astype(np.float32)
        try:
            cur = pred
            for _ in range(t2):
                cur = envs.advance_frame(cur.astype(np.float64), solver_params[ti]).astype(
                    np.float32
                )
            return pred, cur, t2
        except SolverAbortError:
            resampled_counter[0] += 1
            continue
    ti = int(rng.integers(len(trajs)))
    fallback = draw_pair(trajs[ti], ladder, rng, ti)
    return fallback.s0, fallback.sT, fallback.horizon


def train(cfg, train_trajs, val_trajs, norm=None):
    """Train per the config; returns a TrainResult with the best checkpoint.

    `norm` defaults to statistics computed from `train_trajs` (never from val).
    """
    validate_ladder(cfg.ladder, train_trajs[0].n_frames)
    if norm is None:
        norm = compute_norm_stats(train_trajs, split="train")
    solver_params = [envs.params_from_dict(t.env_id, t.params) for t in train_trajs]

    net = SurrogateNet(cfg.arch, rng=rng_for(cfg.seed, "init"))
    opt = AdamWState(net.param_list(), lr=cfg.lr, weight_decay=cfg.weight_decay, clip=cfg.clip)
    rng = rng_for(cfg.seed, "train")
    val_pairs = draw_val_pairs(val_trajs, cfg.ladder, cfg.val_pairs, rng_for(cfg.seed, "val-pairs"))
    identity_mse = identity_baseline_mse(val_pairs, norm)

    sc_mode = cfg.loss_mode == "self-consistency"
    probe_ladder = cfg.probe_horizons()
    probe_states = [t.frames[0] for t in val_trajs[: min(8, len(val_trajs))]]
    steps_per_epoch = max(1, cfg.samples_per_epoch // cfg.batch_size)
    params = net.param_list()

    curves = []
    best_val = np.inf
    best_epoch = -1
    best_weights = net.flat_weights()
    aborted = False
    resampled = [0]

    for epoch in range(cfg.epochs):
        lr = lr_at(epoch, cfg.lr, cfg.epochs, cfg.warmup_epochs)
        epoch_losses = []
        for _ in range(steps_per_epoch):
            if sc_mode:
                loss = _sc_step(net, norm, train_trajs, probe_ladder, cfg, rng)
            else:
                loss = _supervised_step(
                    net, norm, train_trajs, solver_params, cfg, rng, epoch, resampled
                )
            loss_val = float(loss.data)
            if not np.isfinite(loss_val):
                aborted = True
                break
            grads, _ = collect_grads(loss, params)
            adamw_step(opt, params, grads, lr=lr)
            epoch_losses.append(loss_val)
        if aborted:
            break
        val_mse = _eval_val_mse(net, norm, val_pairs, cfg.batch_size)
        row = {"epoch": epoch, "val_mse": val_mse, "lr": lr}
        if sc_mode:
            row["sc_loss"] = float(np.mean(epoch_losses))
            row["identity_probe"] = _identity_probe(net, norm, probe_states, max(probe_ladder))
        else:
            row["train_loss"] = float(np.mean(epoch_losses))
        curves.append(row)
        if val_mse < best_val:
            best_val = val_mse
            best_epoch = epoch
            best_weights = net.flat_weights()
        if not sc_mode and epoch - best_epoch >= cfg.patience:
            break

    if not sc_mode:
        net.load_flat_weights(best_weights)  # self-consistency keeps the final (collapsed) net
    meta = {
        "config_hash": cfg.config_hash(),
        "loss_mode": cfg.loss_mode,
        "single_horizon": cfg.is_single_horizon(),
        "best_val_mse": best_val,
        "best_epoch": best_epoch,
        "identity_mse": identity_mse,
        "aborted": aborted,
        "dagger_resampled": resampled[0],
    }
    surrogate = Surrogate(net=net, norm=norm, ladder=cfg.ladder, env_name=cfg.env, meta=meta)
    return TrainResult(
        surrogate=surrogate,
        curves=curves,
        best_val_mse=best_val,
        best_epoch=best_epoch,
        identity_mse=identity_mse,
        aborted=aborted,
        dagger_resampled=resampled[0],
    )


def _supervised_step(net, norm, trajs, solver_params, cfg, rng, epoch, resampled):
    s0s, sts, ts = [], [], []
    dagger_on = cfg.dagger_lambda > 0.0 and epoch >= 1
    for _ in range(cfg.batch_size):
        if dagger_on and rng.random() < cfg.dagger_lambda:
            s0, st, t = _dagger_relabel(
                net, norm, trajs, solver_params, cfg.ladder, rng, resampled
            )
        else:
            ti = int(rng.integers(len(trajs)))
            pair = draw_pair(trajs[ti], cfg.ladder, rng, ti)
            s0, st, t = pair.s0, pair.sT, pair.horizon
        s0s.append(normalize(s0, norm))
        sts.append(normalize(st, norm))
        ts.append(t)
    out = net.forward(np.stack(s0s), ts)
    target = tt.Tensor(np.stack(sts).astype(np.float32))
    return mean_sq(out, target)


def _sc_step(net, norm, trajs, probe_ladder, cfg, rng):
    s0s, ts = [], []
    for _ in range(cfg.batch_size):
        ti = int(rng.integers(len(trajs)))
        t = int(probe_ladder[rng.integers(len(probe_ladder))])
        start = int(rng.integers(trajs[ti].n_frames - t))
        s0s.append(normalize(trajs[ti].frames[start], norm))
        ts.append(t)
    batch = np.stack(s0s)
    out_single = net.forward(batch, ts)
    mid = net.forward(batch, [t // 2 for t in ts])
    out_chain = net.forward(mid, [t // 2 for t in ts])
    return mean_sq(out_single, out_chain)
