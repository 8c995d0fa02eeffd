import numpy as np
import pytest
from scipy.linalg import expm

from conftest import random_cptp, random_density
from oqsim.davies import build_davies, flat_spectral
from oqsim.gkls import GklsGenerator, generator_superoperator
from oqsim.models import SIGMA_1, SIGMA_3, TwoLevelParams, two_level_generator
from oqsim.operators import DensityMatrix, Superoperator
from oqsim.propagation import Schedule
from oqsim.thermo import (
    contractivity_check,
    entropy_balance,
    first_law_ledger,
    h_theorem_check,
    relative_entropy,
    von_neumann_entropy,
)


class TestVonNeumannEntropy:
    def test_pure_state_zero(self):
        assert abs(von_neumann_entropy(DensityMatrix.pure([1, 1j]))) < 1e-14

    def test_maximally_mixed(self):
        for d in (2, 3, 5):
            s = von_neumann_entropy(DensityMatrix.maximally_mixed(d))
            assert abs(s - np.log(d)) < 1e-12

    def test_gibbs_at_log_two_splitting(self):
        # populations (2/3, 1/3)
        rho = DensityMatrix.gibbs(np.diag([0.0, np.log(2.0)]), 1.0)
        expected = -(2 / 3 * np.log(2 / 3) + 1 / 3 * np.log(1 / 3))
        assert abs(von_neumann_entropy(rho) - expected) < 1e-12

    def test_materially_negative_state_rejected(self):
        with pytest.raises(ValueError):
            von_neumann_entropy(np.diag([1.1, -0.1]).astype(complex))

    def test_tiny_negative_eigenvalue_clipped(self):
        m = np.diag([1.0, -1e-14]).astype(complex)
        assert von_neumann_entropy(m) == 0.0


class TestRelativeEntropy:
    def test_self_distance_zero(self, rng):
        rho = random_density(rng, 3)
        assert abs(relative_entropy(rho, rho)) < 1e-10

    def test_pure_vs_maximally_mixed(self):
        rho = DensityMatrix.pure([1, 0])
        sig = DensityMatrix.maximally_mixed(2)
        assert abs(relative_entropy(rho, sig) - np.log(2)) < 1e-12

    def test_support_violation_is_infinite(self):
        rho = DensityMatrix.pure([0, 1])
        sig = DensityMatrix.pure([1, 0])
        assert relative_entropy(rho, sig) == float("inf")

    def test_nonnegative(self, rng):
        for _ in range(5):
            v = relative_entropy(random_density(rng, 3), random_density(rng, 3))
            assert v >= -1e-10


class TestContractivity:
    def test_identity_map_margin_zero(self, rng):
        rho = random_density(rng, 2)
        sig = random_density(rng, 2)
        m = contractivity_check(Superoperator.identity(2), rho, sig)
        assert abs(m) < 1e-10

    def test_random_cptp_margin_nonnegative(self, rng):
        for _ in range(5):
            lam = random_cptp(rng, 3)
            m = contractivity_check(lam, random_density(rng, 3), random_density(rng, 3))
            assert m >= -1e-8

    def test_davies_semigroup_monotone_toward_gibbs(self):
        beta = 1.2
        g = build_davies(
            SIGMA_3 / 2, [SIGMA_1], flat_spectral(0.8, beta=beta), coupling_constant=0.4
        )
        gibbs = DensityMatrix.gibbs(SIGMA_3 / 2, beta)
        rho = DensityMatrix.pure([0, 1])
        lam = Superoperator(expm(0.7 * generator_superoperator(g).matrix))
        m = contractivity_check(lam, rho, gibbs)
        assert m > 1e-3

    def test_non_cp_map_rejected(self, rng):
        # transposition is positive but not completely positive
        d = 2
        s = np.zeros((4, 4), dtype=complex)
        for i in range(d):
            for j in range(d):
                s[j + d * i, i + d * j] = 1.0
        with pytest.raises(ValueError):
            contractivity_check(
                Superoperator(s), random_density(rng, 2), random_density(rng, 2)
            )


class TestHTheorem:
    def test_dephasing_from_plus_state(self):
        g = GklsGenerator(np.zeros((2, 2)), [0.8 * SIGMA_3])
        assert h_theorem_check(g, DensityMatrix.pure([1, 1]), np.linspace(0, 3, 30))

    def test_non_bistochastic_rejected(self):
        g = two_level_generator(TwoLevelParams(1.0, 0.5, 0.0, 0.0))
        with pytest.raises(ValueError):
            h_theorem_check(g, DensityMatrix.pure([1, 1]), [0.0, 1.0])

    def test_fixed_point_entropy_constant(self):
        g = GklsGenerator(np.zeros((2, 2)), [0.8 * SIGMA_3])
        assert h_theorem_check(g, DensityMatrix.maximally_mixed(2), [0.0, 1.0, 2.0])


def _constant_schedule(g, grid):
    return Schedule(lambda t: g, np.asarray(grid, dtype=float))


class TestFirstLawLedger:
    def test_constant_hamiltonian_no_work(self):
        g = two_level_generator(TwoLevelParams(1.0, 0.5, 0.2, 0.0))
        led = first_law_ledger(
            _constant_schedule(g, np.linspace(0, 2, 9)),
            DensityMatrix.pure([0, 1]),
            step=1e-3,
        )
        assert np.abs(led.work).max() < 1e-12
        assert led.closure_defect.max() < 1e-10

    def test_closed_system_no_heat(self):
        g = GklsGenerator(0.7 * SIGMA_3, [])
        led = first_law_ledger(
            _constant_schedule(g, np.linspace(0, 2, 5)),
            DensityMatrix.pure([1, 1]),
            step=1e-3,
        )
        assert np.abs(led.heat).max() < 1e-10
        assert np.abs(led.energy - led.energy[0]).max() < 1e-10

    def test_driven_qubit_first_law_closes(self):
        beta, lam = 1.0, 0.4
        spec = flat_spectral(0.6, beta=beta)

        def provider(t):
            eps = 1.0 + 0.5 * t
            return build_davies(eps / 2 * SIGMA_3, [SIGMA_1], spec, coupling_constant=lam)

        sched = Schedule(provider, np.linspace(0, 2, 11), dhamiltonian=lambda t: 0.25 * SIGMA_3)
        led = first_law_ledger(sched, DensityMatrix.maximally_mixed(2), step=1e-2)
        assert led.closure_defect.max() < 1e-8
        assert np.abs(led.work).max() > 1e-3  # driving actually does work

    def test_closure_at_roundoff_even_for_coarse_steps(self):
        # W, Q, and rho share the same RK4 stages, so the truncation errors of
        # E - W - Q cancel and the closure defect sits at roundoff level
        beta = 1.0
        spec = flat_spectral(0.6, beta=beta)

        def provider(t):
            eps = 1.0 + 0.5 * t
            return build_davies(eps / 2 * SIGMA_3, [SIGMA_1], spec, coupling_constant=0.4)

        sched = Schedule(provider, np.array([0.0, 2.0]), dhamiltonian=lambda t: 0.25 * SIGMA_3)
        for step in (0.1, 0.025):
            led = first_law_ledger(sched, DensityMatrix.maximally_mixed(2), step=step)
            assert led.closure_defect[-1] < 1e-12


class TestEntropyBalance:
    def test_equilibrium_zero_production(self):
        beta = 1.3
        g = build_davies(
            SIGMA_3 / 2, [SIGMA_1], flat_spectral(0.7, beta=beta), coupling_constant=0.4
        )
        gibbs = DensityMatrix.gibbs(SIGMA_3 / 2, beta)
        led = entropy_balance(
            _constant_schedule(g, np.linspace(0, 2, 21)), gibbs, 1 / beta, step=1e-3
        )
        assert np.abs(led.sigma).max() < 1e-8

    def test_relaxation_production_nonnegative(self):
        beta = 1.0
        g = build_davies(
            SIGMA_3 / 2, [SIGMA_1], flat_spectral(0.7, beta=beta), coupling_constant=0.4
        )
        led = entropy_balance(
            _constant_schedule(g, np.linspace(0, 4, 41)),
            DensityMatrix.pure([0, 1]),
            1 / beta,
            step=1e-3,
        )
        assert led.sigma.min() > -1e-6

    def test_wrong_temperature_rejected(self):
        beta = 1.0
        g = build_davies(
            SIGMA_3 / 2, [SIGMA_1], flat_spectral(0.7, beta=beta), coupling_constant=0.4
        )
        with pytest.raises(ValueError):
            entropy_balance(
                _constant_schedule(g, np.linspace(0, 1, 5)),
                DensityMatrix.pure([0, 1]),
                temperature=5.0,
                step=1e-2,
            )
