"""Entropy functionals and thermodynamic bookkeeping for driven open systems.

Internal energy, work, and heat follow the standard open-system split:
E(t) = Tr(rho_t H(t)), dW = Tr(rho_t dH/dt) dt, dQ = Tr((L(t) rho_t) H(t)) dt.
Work and heat are integrated alongside the state by the same RK4 stepper, so
the first-law closure |dE - dW - dQ| inherits the integrator's fourth order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gkls import GklsGenerator, generator_superoperator
from .operators import (
    DensityMatrix,
    Superoperator,
    devectorize,
    is_completely_positive,
    trace_norm,
    vectorize,
)
from .propagation import Schedule

__all__ = [
    "ThermoLedger",
    "von_neumann_entropy",
    "relative_entropy",
    "contractivity_check",
    "h_theorem_check",
    "first_law_ledger",
    "entropy_balance",
]

_EIG_CLIP = 1e-12


def _state_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _clipped_spectrum(rho) -> np.ndarray:
    m = _state_matrix(rho)
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if w.min() < -_EIG_CLIP:
        raise ValueError(f"state has a materially negative eigenvalue {w.min()}")
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho) -> float:
    """S(rho) = -Tr rho ln rho with 0 ln 0 = 0."""
    w = _clipped_spectrum(rho)
    nz = w[w > 0]
    return float(-(nz * np.log(nz)).sum())


def relative_entropy(rho, sigma, support_tol: float = 1e-12) -> float:
    """S(rho|sigma) = Tr(rho ln rho - rho ln sigma); +inf outside sigma's support."""
    r = _state_matrix(rho)
    s = _state_matrix(sigma)
    wr, ur = np.linalg.eigh((r + r.conj().T) / 2)
    ws, us = np.linalg.eigh((s + s.conj().T) / 2)
    wr = np.clip(wr, 0.0, None)
    ws = np.clip(ws, 0.0, None)
    # support condition: weight of rho on sigma's null space
    null = us[:, ws <= support_tol]
    if null.size and np.linalg.norm(null.conj().T @ r @ null, 2) > support_tol:
        return float("inf")
    ent = float(sum(l * np.log(l) for l in wr if l > 0))
    cross = 0.0
    for k, l in enumerate(ws):
        if l > support_tol:
            p = np.vdot(us[:, k], r @ us[:, k]).real
            cross += p * np.log(l)
    return ent - cross


def contractivity_check(lam: Superoperator, rho, sigma, cp_tol: float = 1e-10) -> float:
    """Margin S(rho|sigma) - S(Lam rho|Lam sigma), nonnegative for CPTP maps."""
    ok, lam_min = is_completely_positive(lam, cp_tol)
    if not ok:
        raise ValueError(f"map is not completely positive (Choi min eig {lam_min})")
    d = lam.dim
    tp_defect = np.linalg.norm(
        devectorize(lam.matrix.conj().T @ vectorize(np.eye(d)), d) - np.eye(d), 2
    )
    if tp_defect > cp_tol * d:
        raise ValueError(f"map is not trace preserving (defect {tp_defect})")
    before = relative_entropy(rho, sigma)
    after = relative_entropy(lam.apply(_state_matrix(rho)), lam.apply(_state_matrix(sigma)))
    if np.isinf(before):
        return float("inf") if not np.isinf(after) else 0.0
    return before - after


def h_theorem_check(
    g: GklsGenerator, rho0, t_grid, tol: float = 1e-9
) -> bool:
    """Entropy monotonicity along the evolution of a bistochastic generator."""
    from .gkls import is_bistochastic
    from .propagation import evolve_exact

    if not is_bistochastic(g):
        raise ValueError("generator is not bistochastic")
    l = generator_superoperator(g)
    entropies = [
        von_neumann_entropy(evolve_exact(l, t, _state_matrix(rho0))) for t in t_grid
    ]
    return all(b >= a - tol for a, b in zip(entropies, entropies[1:]))


@dataclass(frozen=True)
class ThermoLedger:
    t: np.ndarray
    energy: np.ndarray
    work: np.ndarray
    heat: np.ndarray
    entropy: np.ndarray
    sigma: np.ndarray            # entropy production rate (nan without a bath temperature)
    closure_defect: np.ndarray   # |dE - W - Q| per row

    def rows(self):
        for i in range(self.t.size):
            yield (
                self.t[i],
                self.energy[i],
                self.work[i],
                self.heat[i],
                self.entropy[i],
                self.sigma[i],
                self.closure_defect[i],
            )


def _dh_dt(schedule: Schedule, t: float, fd_step: float = 1e-6) -> np.ndarray:
    if schedule.dhamiltonian is not None:
        return np.asarray(schedule.dhamiltonian(t), dtype=complex)
    hp = schedule.provider(t + fd_step).hamiltonian
    hm = schedule.provider(max(t - fd_step, 0.0)).hamiltonian
    return (hp - hm) / (fd_step + min(t, fd_step))


def first_law_ledger(
    schedule: Schedule,
    rho0,
    step: float,
    temperature: float | None = None,
) -> ThermoLedger:
    """Integrate state, work, and heat over the schedule grid with RK4.

    The generator provider is sampled continuously in time here (not held
    piecewise constant) so that work done by a smooth ramp is captured.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    grid = schedule.grid
    rho = _state_matrix(rho0)
    d = rho.shape[0]

    gen_cache: dict[float, np.ndarray] = {}

    def l_mat(t: float) -> np.ndarray:
        if t not in gen_cache:
            gen_cache[t] = generator_superoperator(schedule.provider(t)).matrix
        return gen_cache[t]

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        v = y[: d * d]
        lm = l_mat(t)
        h = schedule.provider(t).hamiltonian
        dv = lm @ v
        rho_m = devectorize(v, d)
        dw = np.trace(rho_m @ _dh_dt(schedule, t)).real
        dq = np.trace(devectorize(dv, d) @ h).real
        return np.concatenate([dv, [dw, dq]])

    y = np.concatenate([vectorize(rho), [0.0, 0.0]]).astype(complex)
    energies, works, heats, entropies = [], [], [], []

    def record(t: float, y: np.ndarray):
        rho_m = devectorize(y[: d * d], d)
        h = schedule.provider(t).hamiltonian
        energies.append(float(np.trace(rho_m @ h).real))
        works.append(float(y[d * d].real))
        heats.append(float(y[d * d + 1].real))
        entropies.append(von_neumann_entropy(rho_m))

    record(grid[0], y)
    for t0, t1 in zip(grid[:-1], grid[1:]):
        s = t0
        while s < t1 - 1e-15 * max(t1, 1.0):
            h_step = min(step, t1 - s)
            k1 = rhs(s, y)
            k2 = rhs(s + h_step / 2, y + h_step / 2 * k1)
            k3 = rhs(s + h_step / 2, y + h_step / 2 * k2)
            k4 = rhs(s + h_step, y + h_step * k3)
            y = y + h_step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            s += h_step
        record(t1, y)

    t = np.asarray(grid, dtype=float)
    energy = np.asarray(energies)
    work = np.asarray(works)
    heat = np.asarray(heats)
    entropy = np.asarray(entropies)
    closure = np.abs((energy - energy[0]) - work - heat)

    sigma = np.full_like(t, np.nan)
    if temperature is not None:
        ds = np.gradient(entropy, t)
        dq = np.gradient(heat, t)
        sigma = ds - dq / temperature
    return ThermoLedger(t, energy, work, heat, entropy, sigma, closure)


def entropy_balance(
    schedule: Schedule,
    rho0,
    temperature: float,
    step: float,
    beta_check_tol: float = 1e-8,
) -> ThermoLedger:
    """Entropy production sigma(t) = dS/dt - (1/T) dQ/dt along the schedule.

    Requires every sampled generator to annihilate its temporal Gibbs state.
    """
    beta = 1.0 / temperature
    for t in schedule.grid:
        g = schedule.provider(t)
        gibbs = DensityMatrix.gibbs(g.hamiltonian, beta)
        l = generator_superoperator(g)
        if trace_norm(devectorize(l.matrix @ vectorize(gibbs.matrix), g.dim)) > (
            beta_check_tol * max(np.linalg.norm(l.matrix, 2), 1.0)
        ):
            raise ValueError(
                f"temporal Gibbs state is not stationary at t={t}"
            )
    return first_law_ledger(schedule, rho0, step, temperature=temperature)
