"""Gradient correctness of every primitive op against central finite differences.

The finite-difference oracle runs the identical graph in float64 at step 1e-3;
analytic gradients must match to relative error < 1e-4 wherever |g| > 1e-6.
"""

import numpy as np
import pytest

from hybridwm.errors import ShapeMismatchError
from hybridwm.tnn import tensor as tt

FD_H = 1e-3
REL_TOL = 1e-4


def numeric_grad(build_loss, arrays, which, idx):
    a = arrays[which]
    orig = a[idx]
    a[idx] = orig + FD_H
    lp = float(build_loss(*arrays).data)
    a[idx] = orig - FD_H
    lm = float(build_loss(*arrays).data)
    a[idx] = orig
    return (lp - lm) / (2 * FD_H)


def check_op(build_loss, arrays, coords_per_array=6, seed=0):
    """FD-check d(loss)/d(array) for random coordinates of every input array."""
    rng = np.random.default_rng(seed)
    tensors = [tt.Tensor(a, requires_grad=True) for a in arrays]
    loss = build_loss(*tensors)
    loss.backward()
    for which, (arr, ten) in enumerate(zip(arrays, tensors)):
        assert ten.grad is not None, f"input {which} got no gradient"
        for _ in range(coords_per_array):
            idx = tuple(rng.integers(s) for s in arr.shape)
            g = ten.grad[idx]
            fd = numeric_grad(lambda *xs: build_loss(*[tt.Tensor(x) if not isinstance(x, tt.Tensor) else x for x in xs]), arrays, which, idx)
            if abs(g) > 1e-6:
                assert abs(fd - g) / abs(g) < REL_TOL, f"input {which} idx {idx}: {g} vs fd {fd}"


def rand(*shape, seed=0):
    return np.random.default_rng(seed).standard_normal(shape)


class TestElementwise:
    def test_add_mul_sub(self):
        a, b = rand(4, 5, seed=1), rand(4, 5, seed=2)
        check_op(lambda x, y: ((x + y) * x - y).mean(), [a, b])

    def test_broadcast_bias(self):
        x, b = rand(6, 3, seed=3), rand(3, seed=4)
        check_op(lambda t, u: (t + u).sum(), [x, b])
        # adjoint of broadcasting sums over the broadcast axis
        tx, tb = tt.Tensor(x), tt.Tensor(b, requires_grad=True)
        (tx + tb).sum().backward()
        assert np.allclose(tb.grad, np.full(3, 6.0))

    def test_scale_and_neg(self):
        a = rand(7, seed=5)
        check_op(lambda x: (-x).scale(2.5).sum(), [a])

    def test_activations(self):
        for fn in (tt.silu, tt.tanh):
            a = rand(5, 4, seed=6)
            check_op(lambda x, f=fn: f(x).mean(), [a])

    def test_relu_gradient_away_from_kink(self):
        a = rand(40, seed=7)
        a[np.abs(a) < 0.05] += 0.1
        check_op(lambda x: tt.relu(x).sum(), [a])


class TestStructured:
    def test_matmul(self):
        a, b = rand(4, 6, seed=8), rand(6, 3, seed=9)
        check_op(lambda x, y: tt.matmul(x, y).mean(), [a, b])

    def test_matmul_shape_error(self):
        with pytest.raises(ShapeMismatchError):
            tt.matmul(tt.Tensor(rand(3, 4)), tt.Tensor(rand(5, 2)))

    def test_conv3x3(self):
        x, w, b = rand(2, 3, 6, 6, seed=10), rand(4, 3, 3, 3, seed=11) * 0.5, rand(4, seed=12)
        check_op(lambda a, c, d: tt.conv3x3(a, c, d).mean(), [x, w, b], coords_per_array=8)

    def test_pool_and_upsample(self):
        x = rand(2, 3, 8, 8, seed=13)
        check_op(lambda a: tt.avg_pool2(a).mean(), [x])
        check_op(lambda a: tt.upsample2(a).mean(), [x])

    def test_concat(self):
        a, b = rand(2, 3, 4, 4, seed=14), rand(2, 2, 4, 4, seed=15)
        check_op(lambda x, y: tt.concat(x, y, axis=1).mean(), [a, b])

    def test_reshape(self):
        a = rand(3, 8, seed=16)
        check_op(lambda x: (x.reshape(6, 4) * x.reshape(6, 4)).sum(), [a])


class TestFilm:
    def test_identity_modulation(self):
        x = rand(3, 5, 5, seed=17).astype(np.float32)
        out = tt.film(tt.Tensor(x), tt.Tensor(np.ones(3, np.float32)), tt.Tensor(np.zeros(3, np.float32)))
        assert np.array_equal(out.data, x)

    def test_zero_input_broadcasts_beta(self):
        beta = np.array([1.0, -2.0], dtype=np.float32)
        out = tt.film(
            tt.Tensor(np.zeros((2, 4, 4), np.float32)),
            tt.Tensor(np.full(2, 7.0, np.float32)),
            tt.Tensor(beta),
        )
        assert np.array_equal(out.data, np.broadcast_to(beta[:, None, None], (2, 4, 4)))

    def test_gamma_gradient_is_channel_sum(self):
        # d sum(out) / d gamma[c] = sum over cells of x[c]
        x = rand(2, 2, 2, seed=18)
        g, b = rand(2, seed=19), rand(2, seed=20)
        tx, tg, tb = tt.Tensor(x), tt.Tensor(g, requires_grad=True), tt.Tensor(b)
        tt.film(tx, tg, tb).sum().backward()
        assert np.allclose(tg.grad, x.sum(axis=(1, 2)), rtol=1e-12)
        check_op(lambda a, c, d: tt.film(a, c, d).sum(), [x, g, b])

    def test_batched_film(self):
        x, g, b = rand(3, 2, 4, 4, seed=21), rand(3, 2, seed=22), rand(3, 2, seed=23)
        check_op(lambda a, c, d: tt.film(a, c, d).mean(), [x, g, b])

    def test_shape_mismatch_reports_dimensions(self):
        with pytest.raises(ShapeMismatchError) as exc:
            tt.film(tt.Tensor(rand(3, 4, 4)), tt.Tensor(rand(2)), tt.Tensor(rand(2)))
        assert "(3, 4, 4)" in str(exc.value) and "(2,)" in str(exc.value)


class TestGraph:
    def test_diamond_reuse_accumulates(self):
        # loss = sum(x*x + x*x) -> grad 4x
        x = tt.Tensor(rand(5, seed=24), requires_grad=True)
        y = x * x
        (y + y).sum().backward()
        assert np.allclose(x.grad, 4 * x.data, rtol=1e-6)

    def test_deep_chain_iterative_toposort(self):
        x = tt.Tensor(np.ones(4), requires_grad=True)
        y = x
        for _ in range(5000):
            y = y + x
        y.sum().backward()
        assert np.allclose(x.grad, 5001)

    def test_backward_needs_scalar(self):
        x = tt.Tensor(rand(3, seed=25))
        with pytest.raises(ShapeMismatchError):
            (x + x).backward()

    def test_no_nan_forward_backward(self):
        rng = np.random.default_rng(26)
        for _ in range(20):
            x = tt.Tensor(rng.uniform(-1, 1, (4, 6)).astype(np.float32), requires_grad=True)
            w = tt.Tensor(rng.uniform(-1, 1, (6, 3)).astype(np.float32), requires_grad=True)
            loss = tt.silu(tt.matmul(x, w)).mean()
            loss.backward()
            assert np.isfinite(loss.data)
            assert np.all(np.isfinite(x.grad)) and np.all(np.isfinite(w.grad))
