"""Finite-dimensional operator algebra: states, superoperators, Choi matrices, Kraus sets.

Vectorization is column-stacking throughout: vec(A) stacks the columns of A,
so vec(A rho B) = (B^T kron A) vec(rho).  The Choi matrix of a map Lambda is
indexed C[(i,k),(j,l)] = <i|Lambda(|k><l|)|j> with row index i*d + k.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TOL_HERM",
    "TOL_TRACE",
    "TOL_PSD_FACTOR",
    "DensityMatrix",
    "Superoperator",
    "ChoiMatrix",
    "KrausSet",
    "CompletePositivityError",
    "vectorize",
    "devectorize",
    "super_from_left_right",
    "choi_of",
    "is_completely_positive",
    "kraus_from_choi",
    "kraus_superoperator",
    "trace_norm",
    "is_hermitian",
    "matrix_to_json",
    "matrix_from_json",
]

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD_FACTOR = 1e-10  # tol_psd = TOL_PSD_FACTOR * ||matrix||_2


class CompletePositivityError(ValueError):
    """Raised when a matrix that must be (approximately) PSD materially is not."""


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def is_hermitian(a, tol: float = TOL_HERM) -> bool:
    m = _as_matrix(a)
    scale = max(np.linalg.norm(m, 2), 1.0)
    return np.linalg.norm(m - m.conj().T, 2) <= tol * scale


@dataclass(frozen=True)
class DensityMatrix:
    """Positive semidefinite, unit-trace matrix.  Validated at construction."""

    matrix: np.ndarray
    tol_herm: float = TOL_HERM
    tol_trace: float = TOL_TRACE
    tol_psd: float | None = None

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if not is_hermitian(m, self.tol_herm):
            raise ValueError("density matrix is not hermitian within tolerance")
        if abs(np.trace(m) - 1.0) > self.tol_trace * max(abs(np.trace(m)), 1.0):
            raise ValueError(f"density matrix trace {np.trace(m)} is not 1")
        tol = self.tol_psd
        if tol is None:
            tol = TOL_PSD_FACTOR * max(np.linalg.norm(m, 2), 1.0)
        lam_min = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
        if lam_min < -tol:
            raise ValueError(f"density matrix min eigenvalue {lam_min} below -{tol}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def pure(psi) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return DensityMatrix(np.outer(v, v.conj()))

    @staticmethod
    def maximally_mixed(d: int) -> "DensityMatrix":
        return DensityMatrix(np.eye(d, dtype=complex) / d)

    @staticmethod
    def gibbs(hamiltonian, beta: float) -> "DensityMatrix":
        h = _as_matrix(hamiltonian)
        w, u = np.linalg.eigh(h)
        p = np.exp(-beta * (w - w.min()))
        p /= p.sum()
        return DensityMatrix((u * p) @ u.conj().T)


@dataclass(frozen=True)
class Superoperator:
    """Dense d^2 x d^2 matrix acting on column-stacked vectorized operators."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        d = int(round(np.sqrt(m.shape[0])))
        if d * d != m.shape[0]:
            raise ValueError(f"superoperator side {m.shape[0]} is not a perfect square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def apply(self, rho) -> np.ndarray:
        rho = _as_matrix(rho)
        return devectorize(self.matrix @ vectorize(rho), self.dim)

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.matrix @ other.matrix)

    @staticmethod
    def identity(d: int) -> "Superoperator":
        return Superoperator(np.eye(d * d, dtype=complex))


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_matrix(self.matrix))

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def min_eigenvalue(self) -> float:
        herm = (self.matrix + self.matrix.conj().T) / 2
        return float(np.linalg.eigvalsh(herm).min())


@dataclass(frozen=True)
class KrausSet:
    operators: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def apply(self, rho) -> np.ndarray:
        rho = _as_matrix(rho)
        out = np.zeros_like(rho)
        for w in self.operators:
            out += w @ rho @ w.conj().T
        return out

    def completeness_defect(self) -> float:
        """||sum W^dag W - 1||_2; zero for a trace-preserving map."""
        d = self.dim
        s = sum(w.conj().T @ w for w in self.operators)
        return float(np.linalg.norm(s - np.eye(d), 2))


def vectorize(a) -> np.ndarray:
    """Column-stacking vectorization."""
    return _as_matrix(a).reshape(-1, order="F")


def devectorize(v, d: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    if d is None:
        d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized {d}x{d} matrix")
    return v.reshape(d, d, order="F")


def super_from_left_right(a, b) -> Superoperator:
    """Superoperator of rho -> A rho B."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return Superoperator(np.kron(b.T, a))


def choi_of(s: Superoperator) -> ChoiMatrix:
    """Choi matrix C[(i,k),(j,l)] = <i|Lambda(|k><l|)|j>, row index i*d + k."""
    d = s.dim
    c = np.zeros((d * d, d * d), dtype=complex)
    for k in range(d):
        for l in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[k, l] = 1.0
            block = s.apply(e)  # Lambda(|k><l|)
            c[k::d, l::d] = block
    return ChoiMatrix(c)


def is_completely_positive(s: Superoperator, tol: float = TOL_PSD_FACTOR):
    """CP test via the Choi spectrum.  Returns (verdict, min eigenvalue)."""
    c = choi_of(s)
    lam_min = c.min_eigenvalue()
    scale = max(np.linalg.norm(c.matrix, 2), 1.0)
    return lam_min >= -tol * scale, lam_min


def kraus_from_choi(c: ChoiMatrix, tol: float = 1e-12) -> KrausSet:
    """Kraus operators from the spectral decomposition of the Choi matrix.

    Eigenvalues below tol * lambda_max are discarded; materially negative
    eigenvalues raise CompletePositivityError.
    """
    d = c.dim
    herm = (c.matrix + c.matrix.conj().T) / 2
    w, u = np.linalg.eigh(herm)
    lam_max = max(float(w.max()), 0.0)
    cutoff = tol * max(lam_max, 1.0)
    if float(w.min()) < -cutoff:
        raise CompletePositivityError(
            f"Choi matrix is not PSD: min eigenvalue {w.min()}"
        )
    ops = []
    for lam, vec in zip(w, u.T):
        if lam > cutoff:
            # eigenvector index (i, k) with row i*d + k -> W[i, k]
            ops.append(np.sqrt(lam) * vec.reshape(d, d))
    return KrausSet(ops)


def kraus_superoperator(ks: KrausSet) -> Superoperator:
    d = ks.dim
    m = np.zeros((d * d, d * d), dtype=complex)
    for w in ks.operators:
        m += np.kron(w.conj(), w)
    return Superoperator(m)


def trace_norm(a) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(_as_matrix(a), compute_uv=False).sum())


# JSON matrix schema: { "dim": d, "re": [[...]], "im": [[...]] }, row-major.

def matrix_to_json(a) -> dict:
    m = _as_matrix(a)
    return {"dim": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    d = int(obj["dim"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.shape != (d, d) or im.shape != (d, d):
        raise ValueError(f"matrix blocks do not match declared dim {d}")
    return re + 1j * im
