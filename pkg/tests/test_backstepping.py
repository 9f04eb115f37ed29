import math

import numpy as np
import pytest

from issgain import (
    ClosedLoopConfig,
    DisturbanceSignal,
    GridFunction,
    IncompatibleInitialCondition,
    apply_transform,
    bessel_kernel,
    closed_loop_bound,
    feedback_control,
    reciprocity_residual,
    simulate_closed_loop,
    solve_inverse_kernel,
    solve_kernel,
    uniform_grid,
    verify_iss,
)

# dblquad of the closed-form kernel squared over the triangle, lam = 5
BESSEL_NORM_LAM5 = 0.8602171154643504


class TestKernels:
    def test_matches_bessel_closed_form(self, kernels_lam5):
        forward, _ = kernels_lam5
        oracle = bessel_kernel(5.0, 256)
        assert np.max(np.abs(forward.values - oracle.values)) < 1e-10
        assert abs(forward.norm - BESSEL_NORM_LAM5) <= 1e-6

    def test_inverse_matches_negative_lam_bessel(self, kernels_lam5):
        _, inverse = kernels_lam5
        oracle = bessel_kernel(-5.0, 256, "inverse")
        assert np.max(np.abs(inverse.values - oracle.values)) < 1e-10

    def test_diagonal_and_edge_conditions(self, kernels_lam5):
        forward, _ = kernels_lam5
        grid = forward.grid
        diag = np.diagonal(forward.values)
        assert np.max(np.abs(diag - 5.0 * (1 - grid) / 2)) < 1e-9
        assert np.max(np.abs(forward.values[:, -1])) < 1e-9

    def test_zero_rate_kernel_vanishes(self):
        cfg = ClosedLoopConfig(D=1.0, p=2.0, c=-0.0)
        k = solve_kernel(ClosedLoopConfig(D=1.0, p=0.0, c=0.0), 64)
        assert np.max(np.abs(k.values)) == 0.0
        assert k.norm == 0.0

    def test_coarse_resolution_rejected(self):
        with pytest.raises(ValueError):
            solve_kernel(ClosedLoopConfig(D=1.0, p=4.0, c=1.0), 16)

    def test_reciprocity_identity(self, kernels_lam5):
        # mutually inverse plus-sign Volterra transforms satisfy
        # l(z,s) + k(z,s) + int_z^s k(z,t) l(t,s) dt = 0
        forward, inverse = kernels_lam5
        assert reciprocity_residual(forward, inverse, stride=16) <= 1e-8


class TestTransforms:
    def test_zero_kernel_is_identity(self):
        k = solve_kernel(ClosedLoopConfig(D=1.0, p=0.0, c=0.0), 64)
        grid = uniform_grid(64)
        f = GridFunction(grid, np.cos(2 * grid))
        out = apply_transform(k, f)
        assert np.max(np.abs(out.values - f.values)) == 0.0

    def test_round_trip(self, kernels_lam5):
        forward, inverse = kernels_lam5
        grid = forward.grid
        f = GridFunction(grid, np.sin(3 * math.pi * grid) + 0.3 * np.cos(2 * math.pi * grid))
        back = apply_transform(inverse, apply_transform(forward, f))
        assert np.max(np.abs(back.values - f.values)) <= 1e-8

    def test_norm_inflation_bound(self, kernels_lam5):
        forward, _ = kernels_lam5
        grid = forward.grid
        h = grid[1] - grid[0]
        rng = np.random.default_rng(7)
        for _ in range(5):
            f = GridFunction(grid, rng.standard_normal(grid.size))
            out = apply_transform(forward, f)
            nf = math.sqrt(np.trapezoid(f.values ** 2, dx=h))
            no = math.sqrt(np.trapezoid(out.values ** 2, dx=h))
            assert no <= (1 + forward.norm) * nf * (1 + 1e-9)

    def test_feedback_values(self, kernels_lam5):
        forward, _ = kernels_lam5
        grid = forward.grid
        zero = GridFunction(grid, np.zeros(grid.size))
        assert feedback_control(forward, zero, 2.5) == 2.5
        # quadrature oracle: u(0) for y = 1-z is d - int k(0,s)(1-s) ds
        from scipy.integrate import quad
        from scipy.special import i1
        lam = forward.lam_bar
        def k0(s):
            arg2 = 1.0 - (1.0 - s) ** 2
            if arg2 <= 0:
                return lam / 2.0
            xi = math.sqrt(lam * arg2)
            return lam * (1.0 - s) * i1(xi) / xi
        exact, _ = quad(lambda s: k0(s) * (1 - s), 0, 1, epsabs=1e-13)
        y = GridFunction(grid, 1 - grid)
        assert feedback_control(forward, y, 0.0) == pytest.approx(-exact, abs=1e-9)


@pytest.fixture(scope="module")
def closed_loop_run():
    cfg = ClosedLoopConfig(D=1.0, p=3.0, c=1.0, d=DisturbanceSignal.sinusoid(1.0, 2.0))
    m = 128
    kernel = solve_kernel(cfg, m)
    inverse = solve_inverse_kernel(cfg, m)
    grid = uniform_grid(m)
    x0 = GridFunction(grid, 0.5 * np.sin(math.pi * grid))
    y0 = apply_transform(inverse, x0)
    result = simulate_closed_loop(cfg, y0, 5e-4, 1.5, kernel=kernel,
                                  inverse_kernel=inverse, n_store=50)
    return cfg, result


class TestClosedLoop:
    def test_transformed_boundary_values(self, closed_loop_run):
        _, result = closed_loop_run
        for i in range(result.x.times.size):
            assert result.x.states[i].values[0] == pytest.approx(
                result.x.d_values[i], abs=1e-9)
            assert result.x.states[i].values[-1] == 0.0

    def test_norm_sandwich(self, closed_loop_run):
        _, result = closed_loop_run
        kn = result.kernel.norm
        ln = result.inverse_kernel.norm
        assert np.all(result.y.norms <= (1 + ln) * result.x.norms * (1 + 1e-9))
        assert np.all(result.x.norms <= (1 + kn) * result.y.norms * (1 + 1e-9))

    def test_envelope_holds(self, closed_loop_run):
        cfg, result = closed_loop_run
        env = closed_loop_bound(cfg, result.kernel.norm, result.inverse_kernel.norm)
        report = verify_iss(result.y, env, epsilons=(0.1, 1.0, 10.0), slack=1e-3)
        assert report.passed

    def test_homogeneous_decay_rate(self):
        cfg = ClosedLoopConfig(D=1.0, p=3.0, c=1.0, d=DisturbanceSignal.constant(0.0))
        m = 128
        kernel = solve_kernel(cfg, m)
        inverse = solve_inverse_kernel(cfg, m)
        grid = uniform_grid(m)
        y0 = apply_transform(inverse, GridFunction(grid, np.sin(math.pi * grid)))
        result = simulate_closed_loop(cfg, y0, 5e-4, 0.6, kernel=kernel,
                                      inverse_kernel=inverse, n_store=12)
        rate = cfg.c + cfg.D * math.pi ** 2
        bound = ((1 + inverse.norm) * (1 + kernel.norm)
                 * np.exp(-rate * result.y.times) * result.y.norms[0])
        assert np.all(result.y.norms <= bound * (1 + 1e-3))

    def test_zero_rate_loop_is_open_loop_heat(self):
        cfg = ClosedLoopConfig(D=1.0, p=0.0, c=0.0, d=DisturbanceSignal.constant(0.0))
        m = 64
        grid = uniform_grid(m)
        y0 = GridFunction(grid, np.sin(math.pi * grid))
        result = simulate_closed_loop(cfg, y0, 1e-3, 0.2, n_store=8)
        assert np.max(np.abs(result.control)) == 0.0
        expected = result.y.norms[0] * np.exp(-math.pi ** 2 * result.y.times)
        assert np.max(np.abs(result.y.norms - expected) / expected) < 5e-4

    def test_target_equation_residual_second_order(self):
        # interior residual of x_t = D x_zz - c x on the transformed
        # trajectory shrinks ~4x under (dz, dt) halving; the last two nodes
        # are excluded because the final half-cell of the transform
        # quadrature is a two-point rule whose O(h^3) local error
        # differentiates to O(h) there
        cfg = ClosedLoopConfig(D=1.0, p=3.0, c=1.0, d=DisturbanceSignal.sinusoid(1.0, 2.0))

        def residual(m, dt):
            kernel = solve_kernel(cfg, m)
            inverse = solve_inverse_kernel(cfg, m)
            grid = uniform_grid(m)
            x0 = GridFunction(grid, 0.4 * np.sin(math.pi * grid))
            y0 = apply_transform(inverse, x0)
            n_steps = round(0.2 / dt)
            result = simulate_closed_loop(cfg, y0, dt, 0.2, kernel=kernel,
                                          inverse_kernel=inverse, n_store=n_steps)
            xs = result.x.state_matrix()
            ts = result.x.times
            i = xs.shape[0] // 2
            xt = (xs[i + 1] - xs[i - 1]) / (ts[i + 1] - ts[i - 1])
            h = 1.0 / m
            xzz = (xs[i, :-2] - 2 * xs[i, 1:-1] + xs[i, 2:]) / (h * h)
            res = xt[1:-1] - cfg.D * xzz + cfg.c * xs[i, 1:-1]
            return np.max(np.abs(res[:-2]))

        r1 = residual(64, 5e-4)
        r2 = residual(128, 2.5e-4)
        assert 3.0 <= r1 / r2 <= 5.0

    def test_incompatible_initial_state(self):
        cfg = ClosedLoopConfig(D=1.0, p=3.0, c=1.0, d=DisturbanceSignal.constant(1.0))
        grid = uniform_grid(64)
        y0 = GridFunction(grid, np.sin(math.pi * grid))  # y0(0) = 0 != u(0)
        with pytest.raises(IncompatibleInitialCondition):
            simulate_closed_loop(cfg, y0, 1e-3, 0.1)

    def test_degenerate_bound_values(self):
        cfg = ClosedLoopConfig(D=1.0, p=0.0, c=0.0)
        env = closed_loop_bound(cfg, 0.0, 0.0)
        assert env.decay_rate == pytest.approx(math.pi ** 2)
        assert env.overshoot_base == 1.0
        assert env.gain_base == pytest.approx(1 / math.sqrt(3), abs=1e-12)
