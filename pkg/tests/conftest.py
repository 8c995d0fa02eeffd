import numpy as np
import pytest

from oqsim.gkls import GklsGenerator
from oqsim.operators import DensityMatrix, KrausSet, kraus_superoperator


def random_density(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m))


def random_gkls(rng, d, n_jumps=2):
    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (h + h.conj().T) / 2
    jumps = [
        rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(n_jumps)
    ]
    return GklsGenerator(h, jumps)


def random_cptp(rng, d, n_kraus=3):
    """Random CPTP map from normalized random Kraus operators."""
    ops = [
        rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(n_kraus)
    ]
    s = sum(a.conj().T @ a for a in ops)
    w, u = np.linalg.eigh(s)
    s_inv_sqrt = (u / np.sqrt(w)) @ u.conj().T
    ks = KrausSet([a @ s_inv_sqrt for a in ops])
    return kraus_superoperator(ks)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
