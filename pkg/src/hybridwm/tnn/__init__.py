"""Minimal dense-tensor autodiff engine and the surrogate architectures."""

from .tensor import (
    Tensor,
    matmul,
    conv3x3,
    avg_pool2,
    upsample2,
    concat,
    film,
    silu,
    relu,
    tanh,
    mean_sq,
)
from .nets import SurrogateNet, horizon_embed, collect_grads, EMBED_DIM
from .optim import AdamWState, adamw_step, lr_at, global_norm

__all__ = [
    "Tensor", "matmul", "conv3x3", "avg_pool2", "upsample2",
    "concat", "film", "silu", "relu", "tanh", "mean_sq",
    "SurrogateNet", "horizon_embed", "collect_grads", "EMBED_DIM",
    "AdamWState", "adamw_step", "lr_at", "global_norm",
]
