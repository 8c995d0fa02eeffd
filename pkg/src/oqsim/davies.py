"""Weak-coupling-limit generator construction.

The system coupling operators are decomposed into frequency components

    e^{itH} S_k e^{-itH} = sum_omega S_k(omega) e^{-i omega t},

the bath enters only through the matrix-valued spectral function
R_hat_kl(omega) (hermitian PSD at every frequency), and the dissipator is

    (lambda^2 / 2) sum_{omega,k,l} R_hat_kl(omega)
        ([S_k(omega) rho, S_l(omega)^dag] + [S_k(omega), rho S_l(omega)^dag]),

rewritten in diagonal standard form by diagonalizing each [R_hat_kl(omega)].
Hamiltonian (Lamb-shift-type) corrections are set to zero; an optional
user-supplied correction matrix may be added but is never computed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .gkls import GklsGenerator, generator_superoperator
from .operators import TOL_PSD_FACTOR, is_hermitian

__all__ = [
    "SpectralFunction",
    "BohrDecomposition",
    "bohr_decompose",
    "build_davies",
    "ergodicity_check",
    "decoherence_block_split",
    "spectral_from_correlation",
    "lorentzian_spectral",
    "ohmic_cubed_exp_spectral",
    "flat_spectral",
]


@dataclass(frozen=True)
class SpectralFunction:
    """Matrix-valued bath spectral function omega -> [R_hat_kl(omega)].

    The evaluator may return a scalar (single coupling channel) or a square
    matrix.  If `beta` is set, values at omega < 0 are derived from the
    thermal relation R_hat_kl(-omega) = e^{-beta omega} R_hat_lk(omega)
    rather than trusting the evaluator; a mismatch beyond kms_tol is an error.
    """

    evaluator: Callable[[float], np.ndarray]
    n_channels: int = 1
    beta: float | None = None
    kms_tol: float = 1e-8

    def _raw(self, omega: float) -> np.ndarray:
        r = np.asarray(self.evaluator(omega), dtype=complex)
        if r.ndim == 0:
            r = r.reshape(1, 1)
        if r.shape != (self.n_channels, self.n_channels):
            raise ValueError(
                f"spectral matrix shape {r.shape} != ({self.n_channels},) * 2"
            )
        return r

    def __call__(self, omega: float) -> np.ndarray:
        if self.beta is not None and omega < 0:
            r = np.exp(self.beta * omega) * self._raw(-omega).T
            raw = np.asarray(self.evaluator(omega), dtype=complex).reshape(r.shape)
            if np.linalg.norm(raw - r) > self.kms_tol * max(np.linalg.norm(r), 1.0):
                raise ValueError(
                    f"evaluator violates the thermal relation at omega={omega}"
                )
        else:
            r = self._raw(omega)
        scale = max(np.linalg.norm(r, 2), 1.0)
        herm = (r + r.conj().T) / 2
        if np.linalg.norm(r - herm, 2) > 1e-10 * scale:
            raise ValueError(f"spectral matrix at omega={omega} is not hermitian")
        lam_min = float(np.linalg.eigvalsh(herm).min())
        if lam_min < -TOL_PSD_FACTOR * scale:
            raise ValueError(
                f"spectral matrix at omega={omega} is not PSD (min eig {lam_min})"
            )
        return herm


@dataclass(frozen=True)
class BohrDecomposition:
    """Frequency components S_k(omega) of the coupling operators."""

    frequencies: np.ndarray                  # sorted distinct Bohr frequencies
    components: dict = field(default_factory=dict)  # (k, omega_index) -> matrix
    energies: np.ndarray | None = None       # eigenvalues of H
    basis: np.ndarray | None = None          # eigenvectors of H (columns)

    def component(self, k: int, omega: float, tol: float = 0.0) -> np.ndarray:
        for i, w in enumerate(self.frequencies):
            if abs(w - omega) <= tol or w == omega:
                return self.components[(k, i)]
        raise KeyError(f"no component at omega={omega}")

    def reconstruct(self, k: int, t: float) -> np.ndarray:
        """sum_omega S_k(omega) e^{-i omega t}, i.e. e^{itH} S_k e^{-itH}."""
        out = None
        for i, w in enumerate(self.frequencies):
            term = self.components[(k, i)] * np.exp(-1j * w * t)
            out = term if out is None else out + term
        return out


def bohr_decompose(h, couplings, freq_tol: float | None = None) -> BohrDecomposition:
    """Split each coupling into eigenprojector sandwiches
    S_k(omega) = sum_{eps_b - eps_a = omega} P_a S_k P_b.

    Bohr frequencies closer than freq_tol (default 1e-9 * ||H||) are merged.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("Hamiltonian is not hermitian")
    couplings = [np.asarray(s, dtype=complex) for s in couplings]
    if freq_tol is None:
        freq_tol = 1e-9 * max(np.linalg.norm(h, 2), 1.0)
    eps, u = np.linalg.eigh(h)
    d = h.shape[0]

    # all level differences, merged within freq_tol
    raw = sorted(eps[b] - eps[a] for a in range(d) for b in range(d))
    merged: list[float] = []
    for w in raw:
        if merged and abs(w - merged[-1]) <= freq_tol:
            continue
        merged.append(float(w))
    freqs = np.asarray(merged)

    def bucket(w: float) -> int:
        i = int(np.argmin(np.abs(freqs - w)))
        return i

    components: dict = {}
    for k, s in enumerate(couplings):
        s_eig = u.conj().T @ s @ u  # coupling in the energy eigenbasis
        comps = {i: np.zeros((d, d), dtype=complex) for i in range(freqs.size)}
        for a in range(d):
            for b in range(d):
                i = bucket(eps[b] - eps[a])
                comps[i][a, b] += s_eig[a, b]
        kept = {}
        for i, m in comps.items():
            if np.linalg.norm(m) > 0:
                kept[i] = u @ m @ u.conj().T
        for i in range(freqs.size):
            components[(k, i)] = kept.get(i, np.zeros((d, d), dtype=complex))
    # drop frequencies with no support in any coupling
    keep = [
        i
        for i in range(freqs.size)
        if any(np.linalg.norm(components[(k, i)]) > 0 for k in range(len(couplings)))
    ]
    if not keep and couplings:
        keep = [bucket(0.0)]
    new_components = {}
    for new_i, i in enumerate(keep):
        for k in range(len(couplings)):
            new_components[(k, new_i)] = components[(k, i)]
    return BohrDecomposition(freqs[keep], new_components, eps, u)


def build_davies(
    h,
    couplings,
    spectral: SpectralFunction,
    coupling_constant: float = 1.0,
    freq_tol: float | None = None,
    hamiltonian_correction=None,
) -> GklsGenerator:
    """Assemble the weak-coupling generator in diagonal standard form.

    Each PSD matrix [R_hat_kl(omega)] is diagonalized, R = U diag(r) U^dag,
    giving jump operators lambda sqrt(r_alpha) sum_k U_{k,alpha} S_k(omega).
    """
    dec = bohr_decompose(h, couplings, freq_tol)
    n = len(couplings)
    if spectral.n_channels != n:
        raise ValueError(
            f"spectral function has {spectral.n_channels} channels, "
            f"{n} couplings supplied"
        )
    jumps = []
    for i, w in enumerate(dec.frequencies):
        r = spectral(float(w))
        vals, vecs = np.linalg.eigh(r)
        for alpha in range(n):
            if vals[alpha] <= 0:
                continue
            op = sum(
                vecs[k, alpha] * dec.components[(k, i)] for k in range(n)
            )
            if np.linalg.norm(op) == 0:
                continue
            jumps.append(coupling_constant * np.sqrt(vals[alpha]) * op)
    h_total = np.asarray(h, dtype=complex)
    if hamiltonian_correction is not None:
        h_total = h_total + np.asarray(hamiltonian_correction, dtype=complex)
    return GklsGenerator(h_total, jumps)


def ergodicity_check(decomposition: BohrDecomposition, n_couplings: int | None = None):
    """Dimension of the commutant {X : [S_k(omega), X] = 0 for all k, omega}.

    Returns (is_ergodic, commutant_dimension); ergodic iff the commutant is
    the scalars (dimension 1).
    """
    ops = [m for m in decomposition.components.values()]
    ops = [m for m in ops if np.linalg.norm(m) > 0]
    if not ops:
        # empty coupling set: everything commutes
        d = decomposition.basis.shape[0] if decomposition.basis is not None else 1
        return False, d * d
    d = ops[0].shape[0]
    eye = np.eye(d, dtype=complex)
    rows = []
    for s in ops:
        # vec([S, X]) = (I kron S - S^T kron I) vec(X)
        rows.append(np.kron(eye, s) - np.kron(s.T, eye))
    system = np.vstack(rows)
    sv = np.linalg.svd(system, compute_uv=False)
    tol = max(sv) * max(system.shape) * np.finfo(float).eps if sv.size else 0.0
    null_dim = int(np.sum(sv <= tol)) + (d * d - sv.size if sv.size < d * d else 0)
    return null_dim == 1, null_dim


@dataclass(frozen=True)
class BlockSplitReport:
    sector_coupling_norm: float
    decoupled: bool
    pauli_rates: np.ndarray          # a[k, l]: rate into k from l (energy basis)
    detailed_balance_defect: float | None
    degenerate_spectrum: bool


def decoherence_block_split(
    g: GklsGenerator, h, beta: float | None = None, tol: float = 1e-12
) -> BlockSplitReport:
    """Check population/coherence decoupling in the eigenbasis of h.

    Valid as a theorem only for nondegenerate Bohr spectra; for other
    generators the result is reported, not asserted.  When beta is given the
    extracted Pauli rate matrix is tested for classical detailed balance
    against the Gibbs populations.
    """
    h = np.asarray(h, dtype=complex)
    eps, u = np.linalg.eigh(h)
    d = h.shape[0]
    # transform generator into the energy eigenbasis
    basis_change = np.kron(u.T, u.conj().T)  # vec(U^dag rho U)
    inv_change = np.kron(u.conj(), u)
    l_mat = basis_change @ generator_superoperator(g).matrix @ inv_change

    pop = [i * d + i for i in range(d)]  # column-stacked diagonal slots
    coh = [i * d + j for j in range(d) for i in range(d) if i != j]
    off1 = l_mat[np.ix_(pop, coh)]
    off2 = l_mat[np.ix_(coh, pop)]
    coupling = max(
        float(np.abs(off1).max()) if off1.size else 0.0,
        float(np.abs(off2).max()) if off2.size else 0.0,
    )

    rates = l_mat[np.ix_(pop, pop)].real

    # degenerate Bohr spectrum if any two level gaps coincide
    gaps = sorted(
        eps[b] - eps[a] for a in range(d) for b in range(d) if a != b
    )
    degenerate = any(
        abs(gaps[i + 1] - gaps[i]) <= 1e-9 * max(np.abs(eps).max(), 1.0)
        for i in range(len(gaps) - 1)
    )

    db_defect = None
    if beta is not None:
        p = np.exp(-beta * (eps - eps.min()))
        p /= p.sum()
        defect = 0.0
        for k in range(d):
            for l in range(d):
                if k != l:
                    defect = max(defect, abs(rates[k, l] * p[l] - rates[l, k] * p[k]))
        db_defect = defect

    return BlockSplitReport(coupling, coupling <= tol, rates, db_defect, degenerate)


def spectral_from_correlation(
    sampler: Callable[[float], np.ndarray],
    t_grid,
    n_channels: int = 1,
    beta: float | None = None,
    warn_tol: float = 1e-8,
) -> SpectralFunction:
    """Numerical Fourier transform R_hat(omega) = int R(t) e^{-i omega t} dt
    over the supplied time grid (composite Simpson).

    A non-PSD result at an evaluated omega triggers a warning carrying the
    worst eigenvalue; values are cached per frequency.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    samples = np.asarray(
        [np.asarray(sampler(t), dtype=complex).reshape(n_channels, n_channels)
         for t in t_grid]
    )
    cache: dict[float, np.ndarray] = {}

    def evaluator(omega: float) -> np.ndarray:
        if omega in cache:
            return cache[omega]
        phase = np.exp(-1j * omega * t_grid)
        r = np.empty((n_channels, n_channels), dtype=complex)
        for k in range(n_channels):
            for l in range(n_channels):
                r[k, l] = simpson(samples[:, k, l] * phase, x=t_grid)
        herm = (r + r.conj().T) / 2
        lam_min = float(np.linalg.eigvalsh(herm).min())
        if lam_min < -warn_tol * max(np.linalg.norm(herm, 2), 1.0):
            import warnings

            warnings.warn(
                f"transformed spectral matrix at omega={omega} is not PSD "
                f"(min eigenvalue {lam_min})"
            )
        cache[omega] = r
        return r

    return SpectralFunction(evaluator, n_channels=n_channels, beta=beta)


# Named presets -------------------------------------------------------------

def _thermal_extend(positive_branch: Callable[[float], float], beta: float | None):
    """Scalar evaluator whose negative branch follows the thermal relation
    when beta is set, and mirrors the positive branch otherwise."""

    def ev(omega: float):
        if omega >= 0 or beta is None:
            return np.array(positive_branch(abs(omega) if beta is None else omega))
        return np.array(np.exp(beta * omega) * positive_branch(-omega))

    return ev


def lorentzian_spectral(tau: float, amplitude: float = 1.0, beta: float | None = None) -> SpectralFunction:
    """R(t) = amplitude * e^{-|t|/tau}  ->  R_hat(omega) = 2 amplitude tau / (1 + omega^2 tau^2)."""

    def base(omega: float) -> float:
        return amplitude * 2 * tau / (1 + (omega * tau) ** 2)

    return SpectralFunction(_thermal_extend(base, beta), beta=beta)


def ohmic_cubed_exp_spectral(
    cutoff: float, amplitude: float = 1.0, beta: float | None = None
) -> SpectralFunction:
    """Vacuum bosonic-field spectral density ~ omega^3 e^{-omega/cutoff} on the
    positive branch; the negative branch is zero unless beta extends it."""

    def base(omega: float) -> float:
        if omega <= 0:
            return 0.0
        return amplitude * omega**3 * np.exp(-omega / cutoff)

    def ev(omega: float):
        if omega >= 0 or beta is None:
            return np.array(base(omega))
        return np.array(np.exp(beta * omega) * base(-omega))

    return SpectralFunction(ev, beta=beta)


def flat_spectral(level: float = 1.0, beta: float | None = None) -> SpectralFunction:
    def base(omega: float) -> float:
        return level

    return SpectralFunction(_thermal_extend(base, beta), beta=beta)
