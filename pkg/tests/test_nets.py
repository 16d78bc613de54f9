"""Architecture contracts: horizon embedding, residual identity, determinism,
hand-computed forward passes, and the whole-net finite-difference check."""

import numpy as np
import pytest

from hybridwm.errors import NonFiniteError, ShapeMismatchError
from hybridwm.tnn import EMBED_DIM, SurrogateNet, collect_grads, horizon_embed
from hybridwm.tnn.nets import _FREQS

MLP_ARCH = {"kind": "film_mlp", "state_dim": 9, "hidden": 32, "blocks": 2,
            "act": "silu", "cond_hidden": 16, "out_gain": 0.1}
UNET_ARCH = {"kind": "unet", "channels": 2, "base": 4, "stages": 2,
             "act": "silu", "cond_hidden": 16, "out_gain": 0.1}


class TestHorizonEmbed:
    def test_t1_zero_phase(self):
        e = horizon_embed(1)
        assert e.shape == (EMBED_DIM,)
        assert np.all(e[0::2] == 1.0)   # cos components at log2(1)=0
        assert np.all(e[1::2] == 0.0)

    def test_ladder_values_distinct(self):
        embs = [horizon_embed(t) for t in (1, 2, 4, 8, 16, 32, 64)]
        for i in range(len(embs)):
            for j in range(i + 1, len(embs)):
                assert np.linalg.norm(embs[i] - embs[j]) > 0

    def test_t64_matches_closed_form(self):
        e = horizon_embed(64)
        x = np.log2(64.0)
        expect = np.empty(EMBED_DIM)
        expect[0::2] = np.cos(_FREQS * x)
        expect[1::2] = np.sin(_FREQS * x)
        assert np.allclose(e, expect.astype(np.float32), rtol=0, atol=0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            horizon_embed(0)


class TestForward:
    def test_residual_identity_mlp_and_unet(self):
        for arch, state in ((MLP_ARCH, np.random.rand(9)),
                            (UNET_ARCH, np.random.rand(2, 8, 8))):
            net = SurrogateNet(arch, rng=np.random.default_rng(0))
            for name, p in net.params.items():
                if name.startswith("out."):
                    p.data[:] = 0
            out = net.predict(state.astype(np.float32), 4)
            assert np.array_equal(out, state.astype(np.float32))

    def test_determinism_bitwise(self):
        net = SurrogateNet(UNET_ARCH, rng=np.random.default_rng(1))
        x = np.random.default_rng(2).random((2, 8, 8)).astype(np.float32)
        assert np.array_equal(net.predict(x, 8), net.predict(x, 8))

    def test_same_seed_same_weights(self):
        a = SurrogateNet(MLP_ARCH, rng=np.random.default_rng(5))
        b = SurrogateNet(MLP_ARCH, rng=np.random.default_rng(5))
        assert np.array_equal(a.flat_weights(), b.flat_weights())

    def test_hand_computed_linear_mlp(self):
        # 1 block, 1 hidden unit, identity activation, FiLM at init (gamma=1, beta=0):
        # h0 = W_in s + b_in; block: h1 = h0 + W2 (W1 h0 + b1) + b2; out = s + W_out h1 + b_out
        arch = {"kind": "film_mlp", "state_dim": 2, "hidden": 1, "blocks": 1,
                "act": "identity", "cond_hidden": 4, "out_gain": 1.0}
        net = SurrogateNet(arch, rng=np.random.default_rng(3))
        w = {
            "in.w": np.array([[0.5], [-1.0]]), "in.b": np.array([0.25]),
            "block0.d1.w": np.array([[2.0]]), "block0.d1.b": np.array([0.5]),
            "block0.d2.w": np.array([[-0.5]]), "block0.d2.b": np.array([1.0]),
            "out.w": np.array([[3.0, -2.0]]), "out.b": np.array([0.1, 0.2]),
        }
        for k, v in w.items():
            net.params[k].data = v.astype(np.float32)
        s = np.array([1.5, -0.5], dtype=np.float32)
        h0 = w["in.w"].T @ s + w["in.b"]
        h1 = h0 + w["block0.d2.w"].T @ (w["block0.d1.w"].T @ h0 + w["block0.d1.b"]) + w["block0.d2.b"]
        expect = s + w["out.w"].T @ h1 + w["out.b"]
        assert np.allclose(net.predict(s, 2), expect, rtol=1e-6)

    def test_shape_mismatch_rejected(self):
        net = SurrogateNet(MLP_ARCH, rng=np.random.default_rng(0))
        with pytest.raises(ShapeMismatchError):
            net.forward(np.zeros((2, 5), np.float32), [1, 1])

    def test_nonfinite_diagnostic_names_layer(self):
        net = SurrogateNet(MLP_ARCH, rng=np.random.default_rng(0))
        net.params["block1.d1.w"].data[0, 0] = np.inf
        with pytest.raises(NonFiniteError) as exc:
            net.predict(np.ones(9, np.float32), 2)
        assert "block1" in str(exc.value)


class TestWholeNetGradients:
    def test_unet_finite_difference_50_params(self):
        """Full small U-Net on an 8x8x2 input, FD oracle in float64."""
        net = SurrogateNet(UNET_ARCH, rng=np.random.default_rng(7), dtype=np.float64)
        x = np.random.default_rng(8).standard_normal((1, 2, 8, 8))

        def loss_value():
            return float((net.forward(x, [4]).data ** 2).mean())

        out = net.forward(x, [4])
        grads, disconnected = collect_grads((out * out).mean(), net.param_list())
        assert disconnected == []
        rng = np.random.default_rng(9)
        names = list(net.params)
        checked = 0
        while checked < 50:
            name = names[rng.integers(len(names))]
            p = net.params[name]
            idx = tuple(rng.integers(s) for s in p.data.shape)
            h = 1e-3
            orig = p.data[idx]
            p.data[idx] = orig + h
            lp = loss_value()
            p.data[idx] = orig - h
            lm = loss_value()
            p.data[idx] = orig
            fd = (lp - lm) / (2 * h)
            g = grads[names.index(name)][idx]
            if abs(g) <= 1e-6:
                continue
            assert abs(fd - g) / abs(g) < 1e-4, f"{name}{idx}: analytic {g} vs fd {fd}"
            checked += 1

    def test_disconnected_parameter_flagged(self):
        net = SurrogateNet(MLP_ARCH, rng=np.random.default_rng(0))
        out = net.forward(np.ones((1, 9), np.float32), [2])
        loss = (out * out).mean()
        extra = net._param("unused.w", np.zeros(3, np.float32))
        grads, disconnected = collect_grads(loss, net.param_list())
        assert "unused.w" in disconnected
        assert np.array_equal(grads[-1], np.zeros(3, np.float32))
        del net.params["unused.w"]

    def test_flat_weight_round_trip(self):
        net = SurrogateNet(MLP_ARCH, rng=np.random.default_rng(11))
        flat = net.flat_weights()
        other = SurrogateNet(MLP_ARCH, rng=np.random.default_rng(12))
        other.load_flat_weights(flat)
        x = np.random.default_rng(13).random(9).astype(np.float32)
        assert np.array_equal(net.predict(x, 4), other.predict(x, 4))
        with pytest.raises(ShapeMismatchError):
            other.load_flat_weights(flat[:-1])
