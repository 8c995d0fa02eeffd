"""Propagators for constant and piecewise-constant time-dependent generators.

Three independent routes are provided for cross-validation: the dense matrix
exponential, a fixed-step classical RK4 integrator on the vectorized ODE, and
a truncated sum of completely positive terms

    Lambda_t = W_t + sum_n int W Phi W Phi ... W  (nested simplex integrals)

with W_t rho = S_t rho S_t^dag, S_t = exp{-itH - (t/2) sum_j V_j^dag V_j} and
Phi rho = sum_j V_j rho V_j^dag.  The truncated sum is a diagnostic oracle,
not a production propagator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .gkls import GklsGenerator, generator_superoperator
from .operators import DensityMatrix, Superoperator, devectorize, vectorize

__all__ = [
    "Schedule",
    "evolve_exact",
    "evolve_rk4",
    "evolve_dyson",
    "dyson_partial_sums",
    "semigroup_defect",
]


@dataclass(frozen=True)
class Schedule:
    """Generator provider over a strictly increasing time grid.

    The generator is held constant on each grid subinterval (adiabatic
    piecewise-constant discretization); `provider(t)` is sampled at the left
    endpoint of the subinterval containing t.  `dhamiltonian`, when given,
    returns dH/dt analytically and is used by the thermodynamic ledger.
    """

    provider: Callable[[float], GklsGenerator]
    grid: np.ndarray
    dhamiltonian: Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.size == 0:
            raise ValueError("schedule grid is empty")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise ValueError("schedule grid must be strictly increasing")
        object.__setattr__(self, "grid", g)

    def at(self, t: float) -> GklsGenerator:
        idx = int(np.searchsorted(self.grid, t, side="right")) - 1
        idx = min(max(idx, 0), self.grid.size - 1)
        return self.provider(self.grid[idx])


def _as_density(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def _as_superoperator(l) -> Superoperator:
    if isinstance(l, GklsGenerator):
        return generator_superoperator(l)
    return l


def evolve_exact(l, t: float, rho0) -> np.ndarray:
    """rho_t = devec(exp(tL) vec(rho0)) via scaling-and-squaring expm."""
    if t < 0:
        raise ValueError("evolution time must be nonnegative")
    s = _as_superoperator(l)
    rho0 = _as_density(rho0)
    return devectorize(expm(t * s.matrix) @ vectorize(rho0), s.dim)


def evolve_rk4(l, t: float, rho0, step: float) -> np.ndarray:
    """Classical fixed-step RK4 on the vectorized master equation.

    Accepts a Superoperator, a GklsGenerator, or a Schedule (piecewise-constant
    generator).  The final partial step is shortened to land exactly on t.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    rho0 = _as_density(rho0)
    d = rho0.shape[0]

    if isinstance(l, Schedule):
        lmat = lambda s: generator_superoperator(l.at(s)).matrix
        cache: dict[int, np.ndarray] = {}

        def apply_l(s, v):
            idx = int(np.searchsorted(l.grid, s, side="right")) - 1
            idx = min(max(idx, 0), l.grid.size - 1)
            if idx not in cache:
                cache[idx] = lmat(l.grid[idx])
            return cache[idx] @ v
    else:
        m = _as_superoperator(l).matrix

        def apply_l(s, v):
            return m @ v

    # land exactly on schedule breakpoints so no step mixes two generators
    breaks = np.array([t])
    if isinstance(l, Schedule):
        interior = l.grid[(l.grid > 0) & (l.grid < t)]
        breaks = np.concatenate([interior, [t]])

    v = vectorize(rho0)
    s = 0.0
    next_break = 0
    while s < t - 1e-15 * max(t, 1.0):
        while next_break < breaks.size - 1 and s >= breaks[next_break] - 1e-15 * max(t, 1.0):
            next_break += 1
        h = min(step, breaks[next_break] - s)
        # generator sampled once per step: it is constant on the subinterval
        k1 = apply_l(s, v)
        k2 = apply_l(s, v + h / 2 * k1)
        k3 = apply_l(s, v + h / 2 * k2)
        k4 = apply_l(s, v + h * k3)
        v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
    return devectorize(v, d)


def _dyson_pieces(g: GklsGenerator):
    d = g.dim
    k = sum((v.conj().T @ v for v in g.jumps), np.zeros((d, d), dtype=complex))
    drift = -1j * g.hamiltonian - 0.5 * k  # S_t = exp(t * drift)
    phi = np.zeros((d * d, d * d), dtype=complex)
    for v in g.jumps:
        phi += np.kron(v.conj(), v)
    return drift, phi


def dyson_partial_sums(
    g: GklsGenerator, t: float, rho0, order: int, n_quad: int = 64
) -> list[np.ndarray]:
    """Partial sums of the completely positive expansion, orders 0..order.

    The n-th term's simplex integral is evaluated recursively on a uniform
    grid of n_quad+1 points with trapezoidal weights:
    I_n(s) = int_0^s du W_{s-u} Phi I_{n-1}(u), I_0(s) = W_s.
    """
    if t < 0 or order < 0:
        raise ValueError("require t >= 0 and order >= 0")
    rho0 = _as_density(rho0)
    d = rho0.shape[0]
    drift, phi = _dyson_pieces(g)

    grid = np.linspace(0.0, t, n_quad + 1)
    h = t / n_quad if n_quad > 0 else 0.0
    # W superoperators on the grid: W_s rho = S_s rho S_s^dag
    w_ops = []
    for s in grid:
        s_mat = expm(s * drift)
        w_ops.append(np.kron(s_mat.conj(), s_mat))

    v0 = vectorize(rho0)
    # level 0: I_0(s_j) v0 = W_{s_j} v0
    level = [w_ops[j] @ v0 for j in range(n_quad + 1)]
    sums = [devectorize(level[-1], d)]
    total = level[-1].copy()
    for _ in range(order):
        nxt = []
        for j in range(n_quad + 1):
            acc = np.zeros(d * d, dtype=complex)
            for m in range(j + 1):
                wgt = h if 0 < m < j else h / 2
                if j == 0:
                    wgt = 0.0
                acc += wgt * (w_ops[j - m] @ (phi @ level[m]))
            nxt.append(acc)
        level = nxt
        total = total + level[-1]
        sums.append(devectorize(total, d))
    return sums


def evolve_dyson(g: GklsGenerator, t: float, rho0, order: int, n_quad: int = 64) -> np.ndarray:
    return dyson_partial_sums(g, t, rho0, order, n_quad)[-1]


def semigroup_defect(l, t: float, s: float) -> float:
    """Operator-norm distance ||Lambda_{t+s} - Lambda_t Lambda_s||."""
    if t < 0 or s < 0:
        raise ValueError("times must be nonnegative")
    m = _as_superoperator(l).matrix
    whole = expm((t + s) * m)
    split = expm(t * m) @ expm(s * m)
    return float(np.linalg.norm(whole - split, 2))
