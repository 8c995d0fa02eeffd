"""Named model and spectral-function presets for the CLI and for tests."""

from __future__ import annotations

import numpy as np

from .davies import (
    SpectralFunction,
    build_davies,
    flat_spectral,
    lorentzian_spectral,
    ohmic_cubed_exp_spectral,
)
from .gkls import GklsGenerator
from .models import (
    SIGMA_1,
    SIGMA_3,
    KickModelParams,
    OscillatorParams,
    TwoLevelParams,
    annihilation,
    kick_decoherence_generator,
    oscillator_generator,
    two_level_generator,
)
from .operators import DensityMatrix, matrix_from_json

__all__ = [
    "MODEL_PRESETS",
    "SPECTRAL_PRESETS",
    "build_model",
    "build_spectral",
    "initial_state",
    "observable_matrix",
    "preset_table",
]


def _spectral_from_params(params: dict) -> SpectralFunction:
    return build_spectral(params.get("spectral", "flat"), params.get("spectral_params", {}))


def _two_level(params: dict) -> GklsGenerator:
    p = TwoLevelParams(
        omega=params["omega"],
        gamma_down=params["gamma_down"],
        gamma_up=params["gamma_up"],
        delta=params.get("delta", 0.0),
    )
    return two_level_generator(p)


def _oscillator(params: dict) -> GklsGenerator:
    p = OscillatorParams(
        omega=params["omega"],
        gamma_down=params["gamma_down"],
        gamma_up=params.get("gamma_up", 0.0),
        n_trunc=params.get("n_trunc", 20),
    )
    return oscillator_generator(p)


def _kick_ring(params: dict) -> GklsGenerator:
    p = KickModelParams(
        lattice_size=params["lattice_size"],
        kick_rates={int(k): v for k, v in params["kick_rates"].items()},
        mass=params.get("mass"),
    )
    return kick_decoherence_generator(p)


def _davies_qubit(params: dict) -> GklsGenerator:
    eps = params["epsilon"]
    spectral = _spectral_from_params(params)
    lam = params.get("coupling", 1.0)
    return build_davies(eps / 2 * SIGMA_3, [SIGMA_1], spectral, lam)


MODEL_PRESETS = {
    "bloch-boltzmann-discrete": (
        None,
        "discrete-velocity classical-quantum model; kernels via JSON matrix schema "
        "(stepped directly, not reduced to a single-space generator)",
    ),
    "davies-qubit": (
        _davies_qubit,
        "weak-coupling qubit: epsilon, coupling, spectral, spectral_params",
    ),
    "kick-ring": (
        _kick_ring,
        "momentum-kick decoherence on a ring: lattice_size, kick_rates {mode: rate}, mass?",
    ),
    "oscillator": (
        _oscillator,
        "damped/pumped oscillator: omega, gamma_down, gamma_up, n_trunc",
    ),
    "two-level": (
        _two_level,
        "Bloch system: omega, gamma_down, gamma_up, delta",
    ),
}

SPECTRAL_PRESETS = {
    "flat": (
        lambda p: flat_spectral(p.get("level", 1.0), p.get("beta")),
        "constant spectral density: level, beta?",
    ),
    "lorentzian": (
        lambda p: lorentzian_spectral(p["tau"], p.get("amplitude", 1.0), p.get("beta")),
        "exponential correlation decay: tau, amplitude, beta?",
    ),
    "ohmic-cubed-exp": (
        lambda p: ohmic_cubed_exp_spectral(p["cutoff"], p.get("amplitude", 1.0), p.get("beta")),
        "omega^3 e^{-omega/cutoff} positive branch: cutoff, amplitude, beta?",
    ),
}


def build_model(name: str, params: dict) -> GklsGenerator:
    if name not in MODEL_PRESETS or MODEL_PRESETS[name][0] is None:
        raise KeyError(f"unknown or non-generator model preset {name!r}")
    return MODEL_PRESETS[name][0](params)


def build_spectral(name: str, params: dict) -> SpectralFunction:
    if name not in SPECTRAL_PRESETS:
        raise KeyError(f"unknown spectral preset {name!r}")
    return SPECTRAL_PRESETS[name][0](params)


_NAMED_STATES = {
    "ground": lambda d: DensityMatrix.pure(np.eye(d, dtype=complex)[:, 0]),
    "excited": lambda d: DensityMatrix.pure(np.eye(d, dtype=complex)[:, -1]),
    "plus": lambda d: DensityMatrix.pure(np.ones(d, dtype=complex)),
    "maximally-mixed": DensityMatrix.maximally_mixed,
}


def initial_state(spec, d: int) -> DensityMatrix:
    """Named state or a JSON matrix object."""
    if isinstance(spec, str):
        if spec not in _NAMED_STATES:
            raise KeyError(f"unknown initial state {spec!r}")
        return _NAMED_STATES[spec](d)
    return DensityMatrix(matrix_from_json(spec))


def observable_matrix(spec, d: int) -> tuple[str, np.ndarray]:
    """Resolve an observable preset name or a JSON matrix to (name, matrix)."""
    if isinstance(spec, str):
        if spec == "sigma3":
            if d != 2:
                raise ValueError("sigma3 requires a two-level model")
            return "sigma3", SIGMA_3
        if spec == "n":
            a = annihilation(d)
            return "n", a.conj().T @ a
        if spec == "coherence_12":
            # hermitian pair measuring Re and Im of the (2,1) matrix element
            raise ValueError("use coherence_12_re / coherence_12_im")
        if spec in ("coherence_12_re", "coherence_12_im"):
            m = np.zeros((d, d), dtype=complex)
            if spec.endswith("_re"):
                m[0, 1] = m[1, 0] = 0.5
            else:
                m[0, 1] = 0.5j
                m[1, 0] = -0.5j
            return spec, m
        raise KeyError(f"unknown observable preset {spec!r}")
    name = spec.get("name", "custom")
    return name, matrix_from_json(spec["matrix"])


def preset_table() -> str:
    lines = ["model presets:"]
    for name in sorted(MODEL_PRESETS):
        lines.append(f"  {name}: {MODEL_PRESETS[name][1]}")
    lines.append("spectral presets:")
    for name in sorted(SPECTRAL_PRESETS):
        lines.append(f"  {name}: {SPECTRAL_PRESETS[name][1]}")
    return "\n".join(lines)
