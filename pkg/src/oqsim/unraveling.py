"""Stochastic pure-state unraveling of the master equation.

The linear Ito-Schrodinger step is

    psi' = psi - i H psi dt - 1/2 (sum_j V_j^dag V_j) psi dt - i sum_j V_j psi dW_j

with independent real Wiener increments dW_j ~ N(0, dt).  Norm is not
preserved along a trajectory; the ensemble average E[|psi><psi|] solves the
master equation, so the density estimate is formed without normalizing psi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gkls import GklsGenerator
from .operators import DensityMatrix

__all__ = [
    "TrajectoryConfig",
    "TrajectoryState",
    "EnsembleResult",
    "em_step",
    "split_seed",
    "sample_initial_states",
    "run_trajectory",
    "ensemble_density",
]


@dataclass(frozen=True)
class TrajectoryConfig:
    dt: float
    n_traj: int
    seed: int
    scheme: str = "euler-maruyama"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_traj < 1:
            raise ValueError("n_traj must be at least 1")
        if self.scheme != "euler-maruyama":
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass(frozen=True)
class TrajectoryState:
    psi: np.ndarray
    t: float


@dataclass(frozen=True)
class EnsembleResult:
    """Per-grid-point density estimates and entrywise standard errors."""

    t_grid: np.ndarray
    rho: np.ndarray        # shape (n_times, d, d), hermitian by construction
    stderr: np.ndarray     # shape (n_times, d, d), real


def em_step(g: GklsGenerator, state: TrajectoryState, dw, dt: float) -> TrajectoryState:
    """One deterministic Euler-Maruyama step given the increments dw ~ N(0, dt)."""
    dw = np.asarray(dw, dtype=float)
    if dw.shape != (len(g.jumps),):
        raise ValueError(f"expected {len(g.jumps)} increments, got {dw.shape}")
    psi = np.asarray(state.psi, dtype=complex)
    h = g.hamiltonian
    k = sum((v.conj().T @ v for v in g.jumps), np.zeros_like(h))
    dpsi = dt * ((-1j * h - 0.5 * k) @ psi)
    for v, inc in zip(g.jumps, dw):
        dpsi += -1j * inc * (v @ psi)
    return TrajectoryState(psi + dpsi, state.t + dt)


def split_seed(seed: int, trajectory_index: int) -> np.random.SeedSequence:
    """Counter-based per-trajectory stream: identical (seed, index) pairs give
    bitwise identical streams, distinct pairs give independent ones."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(trajectory_index,))


def sample_initial_states(rho0: DensityMatrix, n: int, rng) -> np.ndarray:
    """Sample n pure states from the eigen-ensemble of rho0."""
    w, u = np.linalg.eigh(rho0.matrix)
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    idx = rng.choice(w.size, size=n, p=w)
    return u[:, idx].T.copy()


def run_trajectory(
    g: GklsGenerator, psi0, t_grid, dt: float, rng
) -> np.ndarray:
    """Integrate one linear trajectory, returning psi at each grid time.

    Grid times are snapped to whole numbers of dt steps.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    h = g.hamiltonian
    jumps = g.jumps
    k = sum((v.conj().T @ v for v in jumps), np.zeros_like(h))
    drift = -1j * h - 0.5 * k

    t_grid = np.asarray(t_grid, dtype=float)
    steps = np.rint(t_grid / dt).astype(int)
    if np.any(steps < 0):
        raise ValueError("grid times must be nonnegative")
    out = np.empty((t_grid.size, psi.size), dtype=complex)
    done = 0
    sqdt = np.sqrt(dt)
    for i, target in enumerate(steps):
        while done < target:
            dpsi = dt * (drift @ psi)
            for v in jumps:
                dpsi += -1j * (sqdt * rng.standard_normal()) * (v @ psi)
            psi = psi + dpsi
            done += 1
        out[i] = psi
    return out


_CHUNK = 256  # trajectories per vectorized block; fixed so reductions are deterministic


def ensemble_density(
    g: GklsGenerator, rho0: DensityMatrix, t_grid, cfg: TrajectoryConfig
) -> EnsembleResult:
    """Monte Carlo estimate of rho_t = E[|psi><psi|] with standard errors.

    Trajectories keep their individual noise streams (split_seed) but are
    stepped in fixed-size blocks; sums run in trajectory index order, so the
    result is bitwise reproducible for a fixed (seed, n_traj).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    d = rho0.dim
    init_rng = np.random.default_rng(split_seed(cfg.seed, cfg.n_traj))
    psis0 = sample_initial_states(rho0, cfg.n_traj, init_rng)

    h = g.hamiltonian
    jumps = g.jumps
    k = sum((v.conj().T @ v for v in jumps), np.zeros_like(h))
    step_mat = np.eye(d, dtype=complex) + cfg.dt * (-1j * h - 0.5 * k)

    steps = np.rint(t_grid / cfg.dt).astype(int)
    if np.any(steps < 0):
        raise ValueError("grid times must be nonnegative")
    n_steps = int(steps.max()) if steps.size else 0
    n_t = t_grid.size
    sqdt = np.sqrt(cfg.dt)

    mean = np.zeros((n_t, d, d), dtype=complex)
    sq = np.zeros((n_t, d, d), dtype=float)  # E[|entry|^2] accumulator

    for start in range(0, cfg.n_traj, _CHUNK):
        stop = min(start + _CHUNK, cfg.n_traj)
        block = stop - start
        psi = psis0[start:stop].copy()  # (block, d)
        if jumps:
            noise = np.empty((block, n_steps, len(jumps)))
            for b in range(block):
                rng = np.random.default_rng(split_seed(cfg.seed, start + b))
                noise[b] = sqdt * rng.standard_normal((n_steps, len(jumps)))
        snapshot = {}
        done = 0
        targets = set(int(s) for s in steps)
        if 0 in targets:
            snapshot[0] = psi.copy()
        for step_i in range(n_steps):
            new = psi @ step_mat.T
            for j, v in enumerate(jumps):
                new += (-1j * noise[:, step_i, j])[:, None] * (psi @ v.T)
            psi = new
            done = step_i + 1
            if done in targets:
                snapshot[done] = psi.copy()
        for n, s in enumerate(steps):
            p = snapshot[int(s)]
            proj = np.einsum("bi,bj->bij", p, p.conj())
            mean[n] += proj.sum(axis=0)
            sq[n] += (np.abs(proj) ** 2).sum(axis=0)

    mean /= cfg.n_traj
    sq /= cfg.n_traj
    var = np.clip(sq - np.abs(mean) ** 2, 0.0, None)
    stderr = np.sqrt(var / cfg.n_traj)
    # enforce exact hermiticity of the estimate
    mean = (mean + np.conj(np.transpose(mean, (0, 2, 1)))) / 2
    return EnsembleResult(t_grid, mean, stderr)
