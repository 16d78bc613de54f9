"""Closed-form identities of AdamW and the warmup+cosine schedule."""

import numpy as np
import pytest

from hybridwm.tnn import AdamWState, adamw_step, global_norm, lr_at
from hybridwm.tnn.tensor import Tensor


def make_params(values):
    return [Tensor(np.array(v, dtype=np.float32), requires_grad=True) for v in values]


class TestAdamW:
    def test_zero_gradient_pure_decay(self):
        # moments stay zero, so the update is exactly p *= (1 - lr*wd)
        lr, wd = 2e-4, 1e-4
        params = make_params([[1.0, -2.0, 3.5]])
        opt = AdamWState(params, lr=lr, weight_decay=wd)
        before = params[0].data.copy()
        adamw_step(opt, params, [np.zeros(3, dtype=np.float32)])
        expect = before - np.float32(lr * wd) * before
        assert np.array_equal(params[0].data, expect)

    def test_first_step_magnitude_is_lr(self):
        # bias-corrected first step with constant gradient: |update| = lr exactly up to eps
        lr = 1e-3
        params = make_params([[0.0, 0.0]])
        opt = AdamWState(params, lr=lr, weight_decay=0.0, clip=None)
        adamw_step(opt, params, [np.array([1.0, -1.0], dtype=np.float32)])
        assert np.allclose(np.abs(params[0].data), lr, rtol=1e-6)
        assert np.all(np.sign(params[0].data) == [-1.0, 1.0])

    def test_clip_scales_before_moments(self):
        g = np.full(4, 5.0, dtype=np.float32)   # global norm 10
        assert global_norm([g]) == pytest.approx(10.0)
        params = make_params([np.zeros(4)])
        opt = AdamWState(params, lr=1.0, weight_decay=0.0, clip=1.0)
        adamw_step(opt, params, [g])
        # after clipping, effective gradient is 0.5 per coordinate
        assert np.allclose(opt.m[0], 0.1 * 0.5, rtol=1e-6)
        assert np.allclose(opt.v[0], 0.001 * 0.25, rtol=1e-5)

    def test_nonfinite_gradient_skips_step(self):
        params = make_params([[1.0]])
        opt = AdamWState(params, lr=0.1)
        ok = adamw_step(opt, params, [np.array([np.nan], dtype=np.float32)])
        assert not ok
        assert opt.step_count == 0
        assert opt.skipped == 1
        assert params[0].data[0] == 1.0

    def test_step_counter_strictly_increasing(self):
        params = make_params([[1.0]])
        opt = AdamWState(params, lr=0.1, weight_decay=0.0)
        for i in range(3):
            adamw_step(opt, params, [np.ones(1, dtype=np.float32)])
            assert opt.step_count == i + 1

    def test_determinism(self):
        def run():
            params = make_params([np.arange(4), np.ones(2)])
            opt = AdamWState(params, lr=1e-2)
            rng = np.random.default_rng(0)
            for _ in range(25):
                grads = [rng.normal(size=4).astype(np.float32), rng.normal(size=2).astype(np.float32)]
                adamw_step(opt, params, grads)
            return [p.data.copy() for p in params]

        a, b = run(), run()
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


class TestSchedule:
    def test_warmup_boundary_is_base(self):
        base = 2e-4
        assert lr_at(3, base, 40, warmup_epochs=3) == base

    def test_no_warmup_starts_at_base(self):
        assert lr_at(0, 1e-3, 20, warmup_epochs=0) == 1e-3

    def test_final_epoch_near_zero(self):
        base = 2e-4
        assert lr_at(39, base, 40, warmup_epochs=3) < 1e-9 * base

    def test_midpoint_half_base(self):
        # decay span [3, 39]; midpoint epoch 21
        base = 2e-4
        assert lr_at(21, base, 40, warmup_epochs=3) == pytest.approx(base / 2, abs=1e-12)

    def test_warmup_is_linear(self):
        base = 3e-4
        ramp = [lr_at(e, base, 50, warmup_epochs=5) for e in range(5)]
        assert np.allclose(np.diff(ramp), base / 5)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            lr_at(40, 1e-4, 40)
        with pytest.raises(ValueError):
            lr_at(-1, 1e-4, 40)
