"""Horizon-conditioned surrogate architectures.

Two backbones share one conditioning pathway: the horizon T is embedded as
sinusoidal features of log2(T), pushed through a small MLP trunk, and mapped by
per-site zero-initialised linear heads to a (gamma, beta) pair for every FiLM
site. Both backbones are residual in the state: output = state + delta, and
zeroing the final projection makes the network the exact identity map.
"""

import numpy as np

from ..errors import NonFiniteError, ShapeMismatchError
from . import tensor as T

ACTIVATIONS = {
    "silu": T.silu,
    "relu": T.relu,
    "tanh": T.tanh,
    "identity": lambda x: x,
}

EMBED_DIM = 64
_N_FREQ = EMBED_DIM // 2
# geometric frequencies over log2(T); lowest period covers the whole
# extrapolation range, highest resolves adjacent ladder rungs
_FREQS = 0.25 * (8.0 / 0.25) ** (np.arange(_N_FREQ) / (_N_FREQ - 1))


def horizon_embed(horizon):
    """64-dim sinusoidal embedding of log2(T), interleaved (cos, sin) pairs."""
    if horizon <= 0:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    x = np.log2(float(horizon))
    emb = np.empty(EMBED_DIM, dtype=np.float64)
    emb[0::2] = np.cos(_FREQS * x)
    emb[1::2] = np.sin(_FREQS * x)
    return emb.astype(np.float32)


def _glorot(rng, shape, fan_in, fan_out, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class SurrogateNet:
    """Residual state predictor f(state, T) = state + delta(state, T).

    arch is a plain JSON-able dict:
      {"kind": "film_mlp", "state_dim": 9, "hidden": 256, "blocks": 4, ...}
      {"kind": "unet", "channels": 4, "base": 16, "stages": 2, ...}
    shared keys: act, cond_hidden, out_gain.
    """

    def __init__(self, arch, rng=None, dtype=np.float32):
        self.arch = dict(arch)
        self.dtype = np.dtype(dtype)
        self.act = ACTIVATIONS[self.arch.get("act", "silu")]
        self.params = {}
        self._film_sites = []
        rng = rng if rng is not None else np.random.default_rng(0)
        kind = self.arch["kind"]
        if kind == "film_mlp":
            self._build_mlp(rng)
        elif kind == "unet":
            self._build_unet(rng)
        else:
            raise ValueError(f"unknown architecture kind {kind!r}")
        self.forward_calls = 0

    # -- parameter plumbing ----------------------------------------------

    def _param(self, name, value):
        p = T.Tensor(value, requires_grad=True, name=name)
        self.params[name] = p
        return p

    def _dense(self, rng, name, fan_in, fan_out, gain=1.0, zero=False):
        if zero:
            w = np.zeros((fan_in, fan_out), dtype=self.dtype)
        else:
            w = _glorot(rng, (fan_in, fan_out), fan_in, fan_out, self.dtype) * self.dtype.type(gain)
        self._param(f"{name}.w", w)
        self._param(f"{name}.b", np.zeros(fan_out, dtype=self.dtype))

    def _conv(self, rng, name, c_in, c_out, gain=1.0):
        w = _glorot(rng, (c_out, c_in, 3, 3), c_in * 9, c_out * 9, self.dtype) * self.dtype.type(gain)
        self._param(f"{name}.w", w)
        self._param(f"{name}.b", np.zeros(c_out, dtype=self.dtype))

    def _film_site(self, name, channels):
        # zero-init head => gamma = 1, beta = 0 at init (identity modulation)
        ch = self.arch.get("cond_hidden", 128)
        self._param(f"{name}.w", np.zeros((ch, 2 * channels), dtype=self.dtype))
        self._param(f"{name}.b", np.zeros(2 * channels, dtype=self.dtype))
        self._film_sites.append((name, channels))

    def param_list(self):
        return list(self.params.values())

    def flat_weights(self):
        return np.concatenate([p.data.ravel() for p in self.params.values()])

    def load_flat_weights(self, flat):
        flat = np.asarray(flat, dtype=self.dtype)
        total = sum(p.data.size for p in self.params.values())
        if flat.size != total:
            raise ShapeMismatchError(f"weight vector has {flat.size} values, net needs {total}")
        ofs = 0
        for p in self.params.values():
            n = p.data.size
            p.data = flat[ofs : ofs + n].reshape(p.data.shape).copy()
            ofs += n

    def to_dtype(self, dtype):
        """Return a copy of this net with weights cast to dtype (for oracles)."""
        clone = SurrogateNet(self.arch, dtype=dtype)
        for name, p in self.params.items():
            clone.params[name].data = p.data.astype(dtype)
        return clone

    # -- architectures ----------------------------------------------------

    def _build_cond(self, rng):
        ch = self.arch.get("cond_hidden", 128)
        self._dense(rng, "cond.t1", EMBED_DIM, ch)
        self._dense(rng, "cond.t2", ch, ch)

    def _build_mlp(self, rng):
        d = self.arch["state_dim"]
        h = self.arch["hidden"]
        blocks = self.arch["blocks"]
        self._build_cond(rng)
        self._dense(rng, "in", d, h)
        for i in range(blocks):
            self._dense(rng, f"block{i}.d1", h, h)
            self._film_site(f"block{i}.film", h)
            self._dense(rng, f"block{i}.d2", h, h)
        self._dense(rng, "out", h, d, gain=self.arch.get("out_gain", 0.1))

    def _build_unet(self, rng):
        c = self.arch["channels"]
        base = self.arch["base"]
        stages = self.arch["stages"]
        self._build_cond(rng)
        ch = [base * 2**i for i in range(stages)]
        self._conv(rng, "enc0.c1", c, ch[0])
        self._film_site("enc0.f1", ch[0])
        self._conv(rng, "enc0.c2", ch[0], ch[0])
        self._film_site("enc0.f2", ch[0])
        for i in range(1, stages):
            self._conv(rng, f"enc{i}.c1", ch[i - 1], ch[i])
            self._film_site(f"enc{i}.f1", ch[i])
            self._conv(rng, f"enc{i}.c2", ch[i], ch[i])
            self._film_site(f"enc{i}.f2", ch[i])
        for i in range(stages - 2, -1, -1):
            self._conv(rng, f"dec{i}.c1", ch[i] + ch[i + 1], ch[i])
            self._film_site(f"dec{i}.f1", ch[i])
            self._conv(rng, f"dec{i}.c2", ch[i], ch[i])
            self._film_site(f"dec{i}.f2", ch[i])
        self._conv(rng, "out", ch[0], c, gain=self.arch.get("out_gain", 0.1))

    # -- forward -----------------------------------------------------------

    def _cond_trunk(self, horizons):
        emb = np.stack([horizon_embed(int(t)) for t in horizons]).astype(self.dtype)
        z = T.Tensor(emb)
        z = self.act(T.matmul(z, self.params["cond.t1.w"]) + self.params["cond.t1.b"])
        z = self.act(T.matmul(z, self.params["cond.t2.w"]) + self.params["cond.t2.b"])
        return z

    def _film(self, x, trunk, site, channels):
        gb = T.matmul(trunk, self.params[f"{site}.w"]) + self.params[f"{site}.b"]
        gamma = gb.reshape(gb.shape[0], 2, channels)
        one = T.Tensor(np.ones((gb.shape[0], channels), dtype=self.dtype))
        g = _take(gamma, 1, 0) + one
        b = _take(gamma, 1, 1)
        return T.film(x, g, b)

    def forward(self, states, horizons, trace=None):
        """Batched forward pass. states: (B,d) or (B,C,H,W) ndarray or Tensor.

        Returns the output Tensor (graph attached); passing a Tensor keeps the
        graph connected, which the self-consistency loss needs for chaining.
        Pass a list as `trace` to collect (layer_name, Tensor) pairs.
        """
        self.forward_calls += 1
        if isinstance(states, T.Tensor):
            x_in = states
        else:
            x_in = T.Tensor(np.asarray(states, dtype=self.dtype))
        trunk = self._cond_trunk(horizons)
        kind = self.arch["kind"]
        rec = trace.append if trace is not None else (lambda item: None)
        if kind == "film_mlp":
            if x_in.data.ndim != 2 or x_in.data.shape[1] != self.arch["state_dim"]:
                raise ShapeMismatchError(
                    f"expected (B,{self.arch['state_dim']}) state batch, got {x_in.data.shape}"
                )
            h = T.matmul(x_in, self.params["in.w"]) + self.params["in.b"]
            rec(("in", h))
            for i in range(self.arch["blocks"]):
                z = T.matmul(h, self.params[f"block{i}.d1.w"]) + self.params[f"block{i}.d1.b"]
                z = self._film(z, trunk, f"block{i}.film", self.arch["hidden"])
                z = self.act(z)
                z = T.matmul(z, self.params[f"block{i}.d2.w"]) + self.params[f"block{i}.d2.b"]
                h = h + z
                rec((f"block{i}", h))
            delta = T.matmul(self.act(h), self.params["out.w"]) + self.params["out.b"]
            rec(("out", delta))
            return x_in + delta
        # unet
        if x_in.data.ndim != 4 or x_in.data.shape[1] != self.arch["channels"]:
            raise ShapeMismatchError(
                f"expected (B,{self.arch['channels']},H,W) state batch, got {x_in.data.shape}"
            )
        stages = self.arch["stages"]
        ch = [self.arch["base"] * 2**i for i in range(stages)]

        def block(x, name, c):
            x = T.conv3x3(x, self.params[f"{name}.c1.w"], self.params[f"{name}.c1.b"])
            x = self.act(self._film(x, trunk, f"{name}.f1", c))
            x = T.conv3x3(x, self.params[f"{name}.c2.w"], self.params[f"{name}.c2.b"])
            x = self.act(self._film(x, trunk, f"{name}.f2", c))
            rec((name, x))
            return x

        skips = []
        h = block(x_in, "enc0", ch[0])
        for i in range(1, stages):
            skips.append(h)
            h = block(T.avg_pool2(h), f"enc{i}", ch[i])
        for i in range(stages - 2, -1, -1):
            h = T.concat(skips.pop(), T.upsample2(h), axis=1)
            h = block(h, f"dec{i}", ch[i])
        delta = T.conv3x3(h, self.params["out.w"], self.params["out.b"])
        rec(("out", delta))
        return x_in + delta

    def predict(self, state, horizon):
        """Single-state inference; returns an ndarray of the input's shape."""
        out = self.forward(np.asarray(state)[None], [horizon])
        y = out.data[0]
        if not np.all(np.isfinite(y)):
            self._diagnose_nonfinite(state, horizon)
        return y

    def _diagnose_nonfinite(self, state, horizon):
        trace = []
        self.forward(np.asarray(state)[None], [horizon], trace=trace)
        self.forward_calls -= 1  # diagnostic replay is not a counted pass
        for name, t in trace:
            if not np.all(np.isfinite(t.data)):
                raise NonFiniteError(f"non-finite activation at layer {name!r}")
        raise NonFiniteError("non-finite output (layer not localised)")


def _take(t, axis, index):
    """Differentiable single-index slice along an axis."""
    sl = [slice(None)] * t.data.ndim
    sl[axis] = index
    sl = tuple(sl)
    out = T.Tensor(t.data[sl], (t,))

    def back(g):
        full = np.zeros_like(t.data)
        full[sl] = g
        t._accum(full)

    out._backward = back
    return out


def collect_grads(loss, params):
    """Backprop from `loss`, returning grads aligned with `params`.

    Parameters unreachable from the loss get a zero gradient and are named in
    the returned diagnostic list.
    """
    for p in params:
        p.grad = None
    loss.backward()
    grads, disconnected = [], []
    for p in params:
        if p.grad is None:
            grads.append(np.zeros_like(p.data))
            disconnected.append(p.name)
        else:
            grads.append(p.grad)
    return grads, disconnected
