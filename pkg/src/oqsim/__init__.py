"""Simulation and verification toolkit for quantum dynamical semigroups.

Construct completely positive trace-preserving Markovian generators,
propagate density matrices, unravel them into stochastic trajectories,
assemble weak-coupling generators from bath spectral data, and check the
structural and thermodynamic laws the dynamics must obey.
"""

from .operators import (
    ChoiMatrix,
    CompletePositivityError,
    DensityMatrix,
    KrausSet,
    Superoperator,
    choi_of,
    devectorize,
    is_completely_positive,
    kraus_from_choi,
    super_from_left_right,
    trace_norm,
    vectorize,
)
from .gkls import (
    GklsGenerator,
    WhiteNoiseGenerator,
    adjoint_generator,
    generator_superoperator,
    is_bistochastic,
    white_noise_generator,
)
from .propagation import (
    Schedule,
    evolve_dyson,
    evolve_exact,
    evolve_rk4,
    semigroup_defect,
)
from .unraveling import TrajectoryConfig, em_step, ensemble_density, split_seed
from .davies import (
    BohrDecomposition,
    SpectralFunction,
    bohr_decompose,
    build_davies,
    decoherence_block_split,
    ergodicity_check,
    spectral_from_correlation,
)
from .thermo import (
    ThermoLedger,
    contractivity_check,
    entropy_balance,
    first_law_ledger,
    h_theorem_check,
    relative_entropy,
    von_neumann_entropy,
)

__version__ = "0.1.0"
