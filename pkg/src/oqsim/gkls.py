"""Standard-form generators of quantum dynamical semigroups.

A generator is a Hamiltonian H plus a list of jump operators V_j (rates folded
into the V_j), acting as

    L rho = -i[H, rho] + sum_j V_j rho V_j^dag - 1/2 {sum_j V_j^dag V_j, rho}.

White-noise generators restrict to hermitian jumps, giving the double
commutator form L rho = -i[H, rho] - 1/2 sum_j [V_j, [V_j, rho]].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .operators import (
    TOL_HERM,
    Superoperator,
    is_hermitian,
    matrix_from_json,
    matrix_to_json,
    super_from_left_right,
)

__all__ = [
    "GklsGenerator",
    "WhiteNoiseGenerator",
    "generator_superoperator",
    "generator_superoperator_commutator_form",
    "adjoint_generator",
    "is_bistochastic",
    "white_noise_generator",
]


@dataclass(frozen=True)
class GklsGenerator:
    hamiltonian: np.ndarray
    jumps: list = field(default_factory=list)

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if not is_hermitian(h):
            raise ValueError("Hamiltonian is not hermitian within tolerance")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(
            self, "jumps", [np.asarray(v, dtype=complex) for v in self.jumps]
        )
        for v in self.jumps:
            if v.shape != h.shape:
                raise ValueError("jump operator dimension mismatch")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        h = self.hamiltonian
        out = -1j * (h @ rho - rho @ h)
        for v in self.jumps:
            k = v.conj().T @ v
            out += v @ rho @ v.conj().T - 0.5 * (k @ rho + rho @ k)
        return out

    def to_json(self) -> dict:
        return {
            "hamiltonian": matrix_to_json(self.hamiltonian),
            "jumps": [matrix_to_json(v) for v in self.jumps],
        }

    @staticmethod
    def from_json(obj) -> "GklsGenerator":
        return GklsGenerator(
            matrix_from_json(obj["hamiltonian"]),
            [matrix_from_json(v) for v in obj.get("jumps", [])],
        )


@dataclass(frozen=True)
class WhiteNoiseGenerator:
    """Time-dependent Hamiltonian plus hermitian (selfadjoint) jumps."""

    hamiltonian: Callable[[float], np.ndarray]
    selfadjoint_jumps: list = field(default_factory=list)

    def __post_init__(self):
        jumps = [np.asarray(v, dtype=complex) for v in self.selfadjoint_jumps]
        for v in jumps:
            if not is_hermitian(v):
                raise ValueError("white-noise jump operator is not hermitian")
        object.__setattr__(self, "selfadjoint_jumps", jumps)

    def at(self, t: float) -> GklsGenerator:
        return GklsGenerator(self.hamiltonian(t), self.selfadjoint_jumps)


def generator_superoperator(g: GklsGenerator) -> Superoperator:
    """Matrix of L in the column-stacking representation."""
    d = g.dim
    eye = np.eye(d, dtype=complex)
    h = g.hamiltonian
    m = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for v in g.jumps:
        k = v.conj().T @ v
        m += np.kron(v.conj(), v) - 0.5 * (np.kron(eye, k) + np.kron(k.T, eye))
    return Superoperator(m)


def generator_superoperator_commutator_form(g: GklsGenerator) -> Superoperator:
    """Independent assembly from the commutator-pair form
    L rho = -i[H, rho] + 1/2 sum_j ([V_j, rho V_j^dag] + [V_j rho, V_j^dag])."""
    d = g.dim
    eye = np.eye(d, dtype=complex)
    h = g.hamiltonian
    m = -1j * (
        super_from_left_right(h, eye).matrix - super_from_left_right(eye, h).matrix
    )
    for v in g.jumps:
        vd = v.conj().T
        # [V, rho V^dag] = V rho V^dag - rho V^dag V
        m += 0.5 * (
            super_from_left_right(v, vd).matrix
            - super_from_left_right(eye, vd @ v).matrix
        )
        # [V rho, V^dag] = V rho V^dag - V^dag V rho
        m += 0.5 * (
            super_from_left_right(v, vd).matrix
            - super_from_left_right(vd @ v, eye).matrix
        )
    return Superoperator(m)


def adjoint_generator(g: GklsGenerator) -> Superoperator:
    """Heisenberg-picture generator L*, the Hilbert-Schmidt adjoint of L."""
    return Superoperator(generator_superoperator(g).matrix.conj().T)


def is_bistochastic(g: GklsGenerator, tol: float = 1e-10) -> bool:
    """True iff both L(1) = 0 and L*(1) = 0 within tol."""
    d = g.dim
    eye = np.eye(d, dtype=complex)
    scale = max(np.linalg.norm(generator_superoperator(g).matrix, 2), 1.0)
    fwd = np.linalg.norm(g.apply(eye), 2)
    adj = np.linalg.norm(adjoint_generator(g).apply(eye), 2)
    return fwd <= tol * scale and adj <= tol * scale


def white_noise_generator(w: WhiteNoiseGenerator, t: float = 0.0) -> Superoperator:
    """Superoperator of the double-commutator generator at time t."""
    return generator_superoperator(w.at(t))
