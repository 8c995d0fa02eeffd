import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_density, random_gkls
from oqsim.gkls import GklsGenerator, generator_superoperator
from oqsim.models import SIGMA_3, TwoLevelParams, two_level_generator
from oqsim.operators import DensityMatrix, Superoperator, trace_norm, vectorize, devectorize
from oqsim.propagation import (
    Schedule,
    dyson_partial_sums,
    evolve_dyson,
    evolve_exact,
    evolve_rk4,
    semigroup_defect,
)


class TestEvolveExact:
    def test_time_zero_is_identity(self, rng):
        g = random_gkls(rng, 3)
        rho = random_density(rng, 3).matrix
        assert np.abs(evolve_exact(g, 0.0, rho) - rho).max() < 1e-14

    def test_two_level_stationary_population(self):
        gd, gu = 0.2, 0.1
        g = two_level_generator(TwoLevelParams(1.0, gd, gu, 0.3))
        rho = DensityMatrix.pure([0, 1]).matrix
        out = evolve_exact(g, 200.0, rho)
        assert abs(out[0, 0].real - 2 / 3) < 1e-8

    def test_closed_system_is_unitary_conjugation(self, rng):
        h = rng.normal(size=(3, 3))
        h = (h + h.T) / 2
        g = GklsGenerator(h, [])
        rho = random_density(rng, 3).matrix
        t = 0.8
        u = expm(-1j * t * h)
        assert np.abs(evolve_exact(g, t, rho) - u @ rho @ u.conj().T).max() < 1e-10

    def test_negative_time_rejected(self, rng):
        with pytest.raises(ValueError):
            evolve_exact(random_gkls(rng, 2), -1.0, np.eye(2) / 2)


class TestEvolveRk4:
    def test_matches_exact_with_fourth_order(self, rng):
        g = random_gkls(rng, 2, n_jumps=1)
        rho = random_density(rng, 2).matrix
        t = 1.0
        exact = evolve_exact(g, t, rho)
        errs = []
        for step in (0.05, 0.025):
            approx = evolve_rk4(g, t, rho, step)
            errs.append(np.abs(approx - exact).max())
        order = np.log2(errs[0] / errs[1])
        assert order >= 3.8

    def test_schedule_matches_piecewise_exponentials(self, rng):
        gens = [random_gkls(rng, 2, n_jumps=1) for _ in range(3)]
        grid = np.array([0.0, 0.4, 0.9, 1.5])

        def provider(t):
            idx = min(int(np.searchsorted(grid, t, side="right")) - 1, 2)
            return gens[max(idx, 0)]

        sched = Schedule(provider, grid)
        rho = random_density(rng, 2).matrix
        v = vectorize(rho)
        for g, dt in zip(gens, np.diff(grid)):
            v = expm(dt * generator_superoperator(g).matrix) @ v
        oracle = devectorize(v, 2)
        approx = evolve_rk4(sched, 1.5, rho, 1e-3)
        assert np.abs(approx - oracle).max() < 1e-8

    def test_zero_generator(self, rng):
        rho = random_density(rng, 2).matrix
        s = Superoperator(np.zeros((4, 4)))
        assert np.array_equal(evolve_rk4(s, 1.0, rho, 0.1), rho)

    def test_trace_drift_small(self, rng):
        g = random_gkls(rng, 3)
        rho = random_density(rng, 3).matrix
        out = evolve_rk4(g, 2.0, rho, 1e-3)
        assert abs(np.trace(out) - 1.0) < 1e-8

    def test_bad_step_rejected(self, rng):
        with pytest.raises(ValueError):
            evolve_rk4(random_gkls(rng, 2), 1.0, np.eye(2) / 2, 0.0)


class TestEvolveDyson:
    def test_order_zero_is_trace_contracting(self):
        g = two_level_generator(TwoLevelParams(0.5, 0.8, 0.0, 0.0))
        rho = DensityMatrix.pure([0, 1]).matrix
        out = evolve_dyson(g, 0.5, rho, order=0)
        assert np.trace(out).real <= 1.0 + 1e-12

    def test_damping_qubit_matches_exact(self):
        gd = 0.5
        g = two_level_generator(TwoLevelParams(1.0, gd, 0.0, 0.0))
        rho = DensityMatrix.pure([1, 1]).matrix
        t = 0.1 / gd
        approx = evolve_dyson(g, t, rho, order=6)
        exact = evolve_exact(g, t, rho)
        assert np.abs(approx - exact).max() < 1e-6

    def test_partial_sum_traces_monotone(self):
        g = two_level_generator(TwoLevelParams(1.0, 0.5, 0.3, 0.0))
        rho = DensityMatrix.pure([1, 1]).matrix
        sums = dyson_partial_sums(g, 0.4, rho, order=8)
        traces = [np.trace(s).real for s in sums]
        assert all(b >= a - 1e-12 for a, b in zip(traces, traces[1:]))
        assert abs(traces[-1] - 1.0) < 1e-4


class TestSemigroupDefect:
    def test_exact_exponentials(self, rng):
        g = random_gkls(rng, 2)
        assert semigroup_defect(g, 0.3, 0.7) < 1e-10

    def test_zero_time(self, rng):
        g = random_gkls(rng, 2)
        assert semigroup_defect(g, 0.0, 0.5) < 1e-13


class TestContinuity:
    def test_short_time_slope_bounded(self, rng):
        g = random_gkls(rng, 3)
        rho = random_density(rng, 3).matrix
        slope = trace_norm(g.apply(rho))
        prev = None
        for t in (1e-2, 1e-3, 1e-4):
            dist = trace_norm(evolve_exact(g, t, rho) - rho)
            assert dist <= slope * t * 1.5 + 1e-12
            if prev is not None:
                assert dist < prev
            prev = dist


class TestCrossValidation:
    def test_three_propagators_agree_on_damping_qubit(self):
        gd = 0.5
        g = two_level_generator(TwoLevelParams(0.7, gd, 0.0, 0.0))
        rho = DensityMatrix.pure([1, 1j]).matrix
        t = 0.1 / gd
        exact = evolve_exact(g, t, rho)
        rk4 = evolve_rk4(g, t, rho, 1e-3)
        dyson = evolve_dyson(g, t, rho, order=6)
        assert np.abs(exact - rk4).max() < 1e-8
        assert np.abs(exact - dyson).max() < 1e-6
