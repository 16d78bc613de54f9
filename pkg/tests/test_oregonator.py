"""Oregonator solver: fixed points, the kinetics ODE oracle, Newton residuals."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from hybridwm import envs
from hybridwm.envs import oregonator
from hybridwm.errors import SolverAbortError


class TestFixedPoints:
    def test_origin_fixed_point_bitwise(self):
        p = envs.OregonatorParams(grid=16)
        z = np.zeros((2, 16, 16))
        assert np.array_equal(envs.oregonator_step(z, p), z)

    def test_homogeneous_root_unchanged(self):
        p = envs.OregonatorParams(grid=16)
        ustar = envs.homogeneous_root(p)
        # root-finding oracle: residual of the kinetics at (u*, u*) is ~0
        ru, rv = oregonator.reaction_rate(ustar, ustar, p)
        assert abs(ru) < 1e-10 and abs(rv) < 1e-12
        w = np.full((2, 16, 16), ustar)
        out = envs.oregonator_step(w, p)
        assert np.max(np.abs(out - w)) < 1e-8


class TestKineticsOracle:
    def test_d0_single_cell_matches_ode_integration(self):
        """Pure-reaction trajectory vs an adaptive 64-bit ODE oracle, abs err < 1e-6."""
        p = envs.OregonatorParams(eps_kin=0.08, q_kin=0.002, f_kin=0.8,
                                  D=0.0, dt=5e-4, grid=1)
        ustar = envs.homogeneous_root(p)
        ic = np.array([[[1.05 * ustar]], [[0.95 * ustar]]])
        frames = 25

        def rhs(t, y):
            ru, rv = oregonator.reaction_rate(y[0], y[1], p)
            return [ru, rv]

        cur = ic.astype(np.float64)
        state_ode = np.array([ic[0, 0, 0], ic[1, 0, 0]])
        for k in range(frames):
            cur = envs.oregonator_step(cur, p)
            sol = solve_ivp(rhs, (0.0, p.dt), state_ode, method="Radau",
                            rtol=1e-12, atol=1e-14)
            state_ode = sol.y[:, -1]
            err = max(abs(cur[0, 0, 0] - state_ode[0]), abs(cur[1, 0, 0] - state_ode[1]))
            assert err < 1e-6, f"frame {k}: |solver - ode| = {err:.2e}"


class TestStepMechanics:
    def test_newton_residual_below_tolerance(self):
        p = envs.OregonatorParams(grid=32)
        ic = oregonator.initial_state(p, "spiral", np.random.default_rng(3))
        cur = ic
        worst = 0.0
        for _ in range(10):
            cur, (iters, res) = oregonator.oregonator_step_diagnostics(cur, p)
            worst = max(worst, res)
            assert iters <= oregonator.NEWTON_MAX_ITERS
        assert worst < oregonator.NEWTON_TOL

    def test_diffusion_substep_count(self):
        # substeps = ceil(dt / (0.25 dx^2 / D))
        p = envs.OregonatorParams(grid=64, domain=32.0, D=1.0, dt=0.05)
        limit = 0.25 * p.dx * p.dx / p.D
        assert int(np.ceil(p.dt / limit)) == 4   # dx=0.5 -> limit 0.0625

    def test_nonfinite_input_rejected(self):
        p = envs.OregonatorParams(grid=8)
        bad = np.full((2, 8, 8), np.nan)
        with pytest.raises(SolverAbortError):
            envs.oregonator_step(bad, p)

    def test_semigroup_bitwise(self):
        p = envs.OregonatorParams(grid=32)
        ic = oregonator.initial_state(p, "target", np.random.default_rng(5))
        full = envs.rollout(p, ic, 21)
        resumed = envs.rollout(p, full.frames[10], 11)
        assert np.array_equal(full.frames[10:], resumed.frames)


class TestInitialConditions:
    @pytest.mark.parametrize("kind", ["spiral", "target", "random"])
    def test_kinds_physical_and_nonconstant(self, kind):
        p = envs.OregonatorParams(grid=32)
        ic = oregonator.initial_state(p, kind, np.random.default_rng(11))
        assert ic.shape == (2, 32, 32)
        assert ic.min() >= 1e-4 and ic.max() <= 1.0
        assert ic[0].std() > 0 and ic[1].std() > 0

    def test_unknown_kind_rejected(self):
        p = envs.OregonatorParams(grid=8)
        with pytest.raises(ValueError):
            oregonator.initial_state(p, "stripe", np.random.default_rng(0))

    def test_mix_fractions(self):
        # 50% spiral / 30% target / 20% random by construction of the mixing rule
        p = envs.OregonatorParams(grid=8)
        rng = np.random.default_rng(0)
        counts = {"spiral": 0, "target": 0, "random": 0}
        for _ in range(600):
            r = rng.random()
            kind = "spiral" if r < 0.5 else ("target" if r < 0.8 else "random")
            counts[kind] += 1
        assert abs(counts["spiral"] / 600 - 0.5) < 0.07
        assert abs(counts["target"] / 600 - 0.3) < 0.07
