"""AdamW with clip-by-global-norm, and the warmup+cosine LR schedule.

Ordering contract: the global-norm clip is applied to the raw gradients before
they enter the moment buffers; the decoupled weight decay is applied after the
adaptive step. Both identities are relied on by closed-form tests.
"""

import numpy as np


class AdamWState:
    def __init__(self, params, lr, weight_decay=1e-4, clip=1.0,
                 beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.weight_decay = weight_decay
        self.clip = clip
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.skipped = 0


def global_norm(grads):
    return float(np.sqrt(sum(float((g.astype(np.float64) ** 2).sum()) for g in grads)))


def adamw_step(opt, params, grads, lr=None):
    """One update in place. Returns False if skipped on non-finite gradients."""
    lr = opt.lr if lr is None else lr
    if not all(np.all(np.isfinite(g)) for g in grads):
        opt.skipped += 1
        return False
    gn = global_norm(grads)
    if opt.clip is not None and gn > opt.clip:
        scale = opt.clip / gn
        grads = [g * g.dtype.type(scale) for g in grads]
    opt.step_count += 1
    t = opt.step_count
    c1 = 1.0 - opt.beta1**t
    c2 = 1.0 - opt.beta2**t
    for p, g, m, v in zip(params, grads, opt.m, opt.v):
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        update = (m / c1) / (np.sqrt(v / c2) + opt.eps)
        p.data -= (lr * update).astype(p.data.dtype)
        if opt.weight_decay:
            p.data -= (lr * opt.weight_decay) * p.data
    return True


def lr_at(epoch, base_lr, epochs, warmup_epochs=0):
    """Linear warmup to base_lr at epoch == warmup_epochs, cosine to 0 at the last epoch."""
    if not 0 <= epoch < epochs:
        raise ValueError(f"epoch {epoch} outside [0, {epochs})")
    if warmup_epochs > 0 and epoch < warmup_epochs:
        return base_lr * epoch / warmup_epochs
    span = epochs - 1 - warmup_epochs
    if span <= 0:
        return base_lr
    frac = (epoch - warmup_epochs) / span
    return base_lr * 0.5 * (1.0 + np.cos(np.pi * frac))
