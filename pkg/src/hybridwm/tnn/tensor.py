"""Dense-tensor reverse-mode autodiff engine.

Micrograd-style: each op builds a node holding its parents and a closure that
accumulates gradients into them. `backward()` topologically sorts the graph
(iteratively, so deep chained graphs don't hit the recursion limit) and replays
it once per node. Arrays are float32 in production; every op preserves the
input dtype so tests can run the identical graph in float64 against a
finite-difference oracle.
"""

import numpy as np

from ..errors import ShapeMismatchError

__all__ = [
    "Tensor",
    "matmul",
    "conv3x3",
    "avg_pool2",
    "upsample2",
    "concat",
    "film",
    "silu",
    "relu",
    "tanh",
    "mean_sq",
]


class Tensor:
    __slots__ = ("data", "grad", "parents", "_backward", "requires_grad", "name")

    def __init__(self, data, parents=(), backward=None, requires_grad=False, name=""):
        self.data = data if isinstance(data, np.ndarray) else np.asarray(data, dtype=np.float32)
        self.grad = None
        self.parents = parents
        self._backward = backward
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, name={self.name!r})"

    def _accum(self, g):
        if self.grad is None:
            self.grad = g.astype(self.data.dtype, copy=True) if g.dtype != self.data.dtype else g.copy()
        else:
            self.grad += g

    def backward(self):
        if self.data.size != 1:
            raise ShapeMismatchError(f"backward() needs a scalar loss, got shape {self.data.shape}")
        topo = _toposort(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        other = _lift(other, self.dtype)
        out = Tensor(self.data + other.data, (self, other))

        def back(g):
            self._accum(_unbroadcast(g, self.data.shape))
            other._accum(_unbroadcast(g, other.data.shape))

        out._backward = back
        return out

    def __sub__(self, other):
        other = _lift(other, self.dtype)
        out = Tensor(self.data - other.data, (self, other))

        def back(g):
            self._accum(_unbroadcast(g, self.data.shape))
            other._accum(_unbroadcast(-g, other.data.shape))

        out._backward = back
        return out

    def __mul__(self, other):
        other = _lift(other, self.dtype)
        out = Tensor(self.data * other.data, (self, other))

        def back(g):
            self._accum(_unbroadcast(g * other.data, self.data.shape))
            other._accum(_unbroadcast(g * self.data, other.data.shape))

        out._backward = back
        return out

    def __neg__(self):
        out = Tensor(-self.data, (self,))
        out._backward = lambda g: self._accum(-g)
        return out

    __radd__ = __add__
    __rmul__ = __mul__

    def scale(self, c):
        """Multiply by a python scalar constant."""
        c = self.data.dtype.type(c)
        out = Tensor(self.data * c, (self,))
        out._backward = lambda g: self._accum(g * c)
        return out

    def reshape(self, *shape):
        old = self.data.shape
        out = Tensor(self.data.reshape(*shape), (self,))
        out._backward = lambda g: self._accum(g.reshape(old))
        return out

    def sum(self):
        out = Tensor(np.asarray(self.data.sum(), dtype=self.dtype), (self,))
        out._backward = lambda g: self._accum(np.broadcast_to(g, self.data.shape).astype(self.dtype))
        return out

    def mean(self):
        n = self.data.dtype.type(1.0 / self.data.size)
        out = Tensor(np.asarray(self.data.mean(), dtype=self.dtype), (self,))
        out._backward = lambda g: self._accum(np.broadcast_to(g * n, self.data.shape).astype(self.dtype))
        return out


def tensor(data, requires_grad=False, name="", dtype=np.float32):
    return Tensor(np.asarray(data, dtype=dtype), requires_grad=requires_grad, name=name)


def _lift(x, dtype):
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def _unbroadcast(g, shape):
    """Sum gradient g down to `shape` (adjoint of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, extent in enumerate(shape):
        if extent == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def _toposort(root):
    order, visited = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


# -- linear algebra -----------------------------------------------------


def matmul(a, b):
    if a.data.shape[-1] != b.data.shape[0]:
        raise ShapeMismatchError(f"matmul: {a.data.shape} @ {b.data.shape}")
    out = Tensor(a.data @ b.data, (a, b))

    def back(g):
        a._accum(g @ b.data.T)
        b._accum(a.data.T @ g)

    out._backward = back
    return out


# -- activations --------------------------------------------------------


def silu(x):
    sig = 1.0 / (1.0 + np.exp(-x.data))
    out = Tensor((x.data * sig).astype(x.dtype), (x,))

    def back(g):
        x._accum(g * (sig * (1.0 + x.data * (1.0 - sig))).astype(x.dtype))

    out._backward = back
    return out


def relu(x):
    out = Tensor(np.maximum(x.data, 0), (x,))
    out._backward = lambda g: x._accum(g * (x.data > 0))
    return out


def tanh(x):
    t = np.tanh(x.data)
    out = Tensor(t, (x,))
    out._backward = lambda g: x._accum(g * (1.0 - t * t))
    return out


# -- structured ops ------------------------------------------------------


def film(x, gamma, beta):
    """Per-channel scale-and-shift: out[..., c, *spatial] = gamma[..., c]*x + beta[..., c].

    x is (C,), (C,H,W), (B,C) or (B,C,H,W); gamma/beta are (C,) or (B,C) and
    are broadcast over any trailing spatial axes.
    """
    if gamma.data.shape != beta.data.shape:
        raise ShapeMismatchError(f"film: gamma {gamma.data.shape} vs beta {beta.data.shape}")
    spatial = x.data.ndim - gamma.data.ndim
    if spatial < 0 or x.data.shape[: gamma.data.ndim] != gamma.data.shape:
        raise ShapeMismatchError(
            f"film: x {x.data.shape} not modulated by per-channel {gamma.data.shape}"
        )
    gx = gamma.data.reshape(gamma.data.shape + (1,) * spatial)
    bx = beta.data.reshape(beta.data.shape + (1,) * spatial)
    out = Tensor(gx * x.data + bx, (x, gamma, beta))
    spatial_axes = tuple(range(gamma.data.ndim, x.data.ndim))

    def back(g):
        x._accum(g * gx)
        if spatial_axes:
            gamma._accum((g * x.data).sum(axis=spatial_axes))
            beta._accum(g.sum(axis=spatial_axes))
        else:
            gamma._accum(g * x.data)
            beta._accum(g.copy())

    out._backward = back
    return out


def concat(a, b, axis=1):
    out = Tensor(np.concatenate([a.data, b.data], axis=axis), (a, b))
    na = a.data.shape[axis]

    def back(g):
        sl = [slice(None)] * g.ndim
        sl[axis] = slice(0, na)
        a._accum(g[tuple(sl)])
        sl[axis] = slice(na, None)
        b._accum(g[tuple(sl)])

    out._backward = back
    return out


def _im2col3(xpad, H, W):
    """(B,C,H+2,W+2) -> (B*H*W, C*9) patch matrix (one copy)."""
    B, C = xpad.shape[0], xpad.shape[1]
    s = xpad.strides
    view = np.lib.stride_tricks.as_strided(
        xpad, shape=(B, C, H, W, 3, 3), strides=(s[0], s[1], s[2], s[3], s[2], s[3])
    )
    # (B,H,W,C,3,3) -> rows ordered batch-major, channel-minor within a patch
    return view.transpose(0, 2, 3, 1, 4, 5).reshape(B * H * W, C * 9)


def conv3x3(x, w, b):
    """3x3 same convolution with zero padding, NCHW layout.

    x: (B,C,H,W), w: (O,C,3,3), b: (O,). Lowered to one GEMM via im2col.
    """
    if x.data.ndim != 4 or w.data.ndim != 4 or x.data.shape[1] != w.data.shape[1]:
        raise ShapeMismatchError(f"conv3x3: x {x.data.shape}, w {w.data.shape}")
    B, C, H, W = x.data.shape
    O = w.data.shape[0]
    xpad = np.zeros((B, C, H + 2, W + 2), dtype=x.dtype)
    xpad[:, :, 1:-1, 1:-1] = x.data
    cols = _im2col3(xpad, H, W)                      # (BHW, C9)
    wmat = w.data.reshape(O, C * 9)                  # (O, C9)
    y = cols @ wmat.T + b.data                       # (BHW, O)
    out = Tensor(y.reshape(B, H, W, O).transpose(0, 3, 1, 2), (x, w, b))

    def back(g):
        gmat = g.transpose(0, 2, 3, 1).reshape(B * H * W, O)
        w._accum((gmat.T @ cols).reshape(O, C, 3, 3))
        b._accum(gmat.sum(axis=0))
        dcols = (gmat @ wmat).reshape(B, H, W, C, 3, 3)
        dxpad = np.zeros_like(xpad)
        for di in range(3):
            for dj in range(3):
                dxpad[:, :, di : di + H, dj : dj + W] += dcols[:, :, :, :, di, dj].transpose(
                    0, 3, 1, 2
                )
        x._accum(dxpad[:, :, 1:-1, 1:-1])

    out._backward = back
    return out


def avg_pool2(x):
    B, C, H, W = x.data.shape
    if H % 2 or W % 2:
        raise ShapeMismatchError(f"avg_pool2 needs even extents, got {x.data.shape}")
    v = x.data.reshape(B, C, H // 2, 2, W // 2, 2)
    out = Tensor(v.mean(axis=(3, 5)), (x,))
    quarter = x.data.dtype.type(0.25)

    def back(g):
        gx = np.repeat(np.repeat(g, 2, axis=2), 2, axis=3) * quarter
        x._accum(gx)

    out._backward = back
    return out


def upsample2(x):
    B, C, H, W = x.data.shape
    out = Tensor(np.repeat(np.repeat(x.data, 2, axis=2), 2, axis=3), (x,))

    def back(g):
        x._accum(g.reshape(B, C, H, 2, W, 2).sum(axis=(3, 5)))

    out._backward = back
    return out


def mean_sq(a, b):
    """Scalar mean of (a-b)^2 over all elements."""
    d = a - b
    return (d * d).mean()
