import numpy as np
import pytest

from oqsim.gkls import GklsGenerator, generator_superoperator
from oqsim.models import SIGMA_3, TwoLevelParams, two_level_generator
from oqsim.operators import DensityMatrix
from oqsim.propagation import evolve_exact
from oqsim.unraveling import (
    TrajectoryConfig,
    TrajectoryState,
    em_step,
    ensemble_density,
    sample_initial_states,
    split_seed,
)


class TestEmStep:
    def test_closed_system_reduction(self):
        h = 0.6 * SIGMA_3
        g = GklsGenerator(h, [])
        psi = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
        dt = 1e-3
        out = em_step(g, TrajectoryState(psi, 0.0), np.zeros(0), dt)
        euler = psi - 1j * dt * (h @ psi)
        assert np.array_equal(out.psi, euler)
        assert out.t == dt

    def test_drift_only_contracts_norm(self):
        v = 0.8 * np.array([[0, 1], [0, 0]], dtype=complex)
        g = GklsGenerator(np.zeros((2, 2)), [v])
        psi = np.array([0.0, 1.0], dtype=complex)
        out = em_step(g, TrajectoryState(psi, 0.0), np.zeros(1), 1e-2)
        expected = psi - 0.5e-2 * (v.conj().T @ v @ psi)
        assert np.allclose(out.psi, expected)
        assert np.linalg.norm(out.psi) < 1.0

    def test_ito_rule_preserves_mean_square_norm(self):
        # E||psi'||^2 = ||psi||^2 + O(dt^2) over many independent single steps
        g = two_level_generator(TwoLevelParams(1.0, 0.8, 0.0, 0.0))
        psi = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
        dt = 1e-3
        rng = np.random.default_rng(11)
        n = 100_000
        sq = np.empty(n)
        for i in range(n):
            dw = rng.normal(0.0, np.sqrt(dt), size=1)
            sq[i] = np.linalg.norm(em_step(g, TrajectoryState(psi, 0.0), dw, dt).psi) ** 2
        mean = sq.mean()
        se = sq.std(ddof=1) / np.sqrt(n)
        assert abs(mean - 1.0) < 4 * se + 10 * dt**2

    def test_wrong_increment_count(self):
        g = two_level_generator(TwoLevelParams(1.0, 0.8, 0.0, 0.0))
        with pytest.raises(ValueError):
            em_step(g, TrajectoryState(np.ones(2, dtype=complex), 0.0), np.zeros(3), 1e-3)


class TestSplitSeed:
    def test_determinism(self):
        a = np.random.default_rng(split_seed(42, 0)).standard_normal(100)
        b = np.random.default_rng(split_seed(42, 0)).standard_normal(100)
        assert np.array_equal(a, b)

    def test_different_indices_distinct(self):
        a = np.random.default_rng(split_seed(42, 0)).standard_normal(100)
        b = np.random.default_rng(split_seed(42, 1)).standard_normal(100)
        assert not np.array_equal(a, b)

    def test_different_seeds_distinct(self):
        a = np.random.default_rng(split_seed(41, 0)).standard_normal(100)
        b = np.random.default_rng(split_seed(42, 0)).standard_normal(100)
        assert not np.array_equal(a, b)

    def test_streams_pass_equidistribution(self):
        # chi-square on decile counts, pooled over two streams
        n = 1_000_000
        for idx in (0, 1):
            u = np.random.default_rng(split_seed(42, idx)).random(n)
            counts, _ = np.histogram(u, bins=10, range=(0, 1))
            chi2 = ((counts - n / 10) ** 2 / (n / 10)).sum()
            # 9 dof: 99.9th percentile approx 27.9
            assert chi2 < 27.9

    def test_noise_moments(self):
        dt = 1e-3
        n = 1_000_000
        dw = np.sqrt(dt) * np.random.default_rng(split_seed(7, 0)).standard_normal(n)
        se_mean = np.sqrt(dt / n)
        assert abs(dw.mean()) < 4 * se_mean
        # var of dw^2 is 2 dt^2
        se_sq = np.sqrt(2 * dt**2 / n)
        assert abs((dw**2).mean() - dt) < 4 * se_sq


class TestEnsembleDensity:
    def test_single_closed_trajectory_is_unitary(self):
        h = 0.9 * SIGMA_3
        g = GklsGenerator(h, [])
        rho0 = DensityMatrix.pure([0, 1])
        grid = np.array([0.0, 0.5, 1.0])
        cfg = TrajectoryConfig(dt=1e-3, n_traj=1, seed=3)
        res = ensemble_density(g, rho0, grid, cfg)
        # |1> is an eigenstate: populations stay exactly put up to O(dt) drift
        for n in range(grid.size):
            assert abs(res.rho[n, 1, 1].real - 1.0) < 5e-3
            assert abs(res.rho[n, 0, 0].real) < 5e-3

    def test_dephasing_matches_exact(self):
        gam = 0.7
        g = GklsGenerator(np.zeros((2, 2)), [np.sqrt(gam) * SIGMA_3])
        rho0 = DensityMatrix.pure([1, 1])
        grid = np.linspace(0.1, 2.0, 8)
        cfg = TrajectoryConfig(dt=1e-3, n_traj=4000, seed=5)
        res = ensemble_density(g, rho0, grid, cfg)
        l = generator_superoperator(g)
        fails = 0
        for n, t in enumerate(grid):
            exact = evolve_exact(l, t, rho0)
            err = np.abs(res.rho[n] - exact)
            fails += int((err > 3 * res.stderr[n] + 5 * cfg.dt).sum())
        assert fails <= max(1, int(0.01 * grid.size * 4))

    def test_estimate_is_hermitian_and_nearly_psd(self):
        g = two_level_generator(TwoLevelParams(1.0, 0.5, 0.2, 0.0))
        rho0 = DensityMatrix.maximally_mixed(2)
        grid = np.array([0.5, 1.5])
        res = ensemble_density(g, rho0, grid, TrajectoryConfig(1e-3, 2000, 9))
        assert np.abs(res.rho - np.conj(np.transpose(res.rho, (0, 2, 1)))).max() == 0
        for n in range(grid.size):
            lam_min = np.linalg.eigvalsh(res.rho[n]).min()
            assert lam_min > -5 * res.stderr[n].max()

    def test_bitwise_reproducible(self):
        g = two_level_generator(TwoLevelParams(0.5, 0.4, 0.1, 0.0))
        rho0 = DensityMatrix.pure([1, 1j])
        grid = np.array([0.2, 0.6])
        cfg = TrajectoryConfig(dt=2e-3, n_traj=300, seed=123)
        a = ensemble_density(g, rho0, grid, cfg)
        b = ensemble_density(g, rho0, grid, cfg)
        assert np.array_equal(a.rho, b.rho)
        assert np.array_equal(a.stderr, b.stderr)

    def test_initial_sampling_respects_weights(self):
        rho0 = DensityMatrix(np.diag([0.25, 0.75]).astype(complex))
        rng = np.random.default_rng(0)
        psis = sample_initial_states(rho0, 20_000, rng)
        frac = np.mean(np.abs(psis[:, 1]) ** 2 > 0.5)
        assert abs(frac - 0.75) < 0.02
