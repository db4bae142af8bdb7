"""Dissipative qubit-resonator model with a Weyl exceptional ring.

Numerical toolkit covering the analytic biorthogonal eigensystem of the
single-excitation non-Hermitian generator, open-system dynamics (no-jump
propagation, master equation, quantum-jump unraveling, driven-model
validation), a synthetic tomography/fitting measurement chain, and the
topological invariants (geometric phase, Chern numbers) and concurrence
whose transitions mark the ring.
"""

from .core import (
    BVector,
    BiorthEigensystem,
    EXCITED,
    PHOTON,
    SingleExcState,
    SystemParams,
    WerGeometry,
    b_from_params,
    discriminant,
    eigensystem,
    ep_distance,
    hamiltonian_matrix,
    params_from_b,
    wer_geometry,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateBasisError,
    EPProximityError,
    FitQualityError,
    NoTransitionError,
    PoleProximityError,
    PostselectionError,
    RefineGridError,
    TrackingAmbiguityError,
    TruncationError,
    WeylringError,
)

__version__ = "0.1.0"

__all__ = [
    "BVector",
    "BiorthEigensystem",
    "EXCITED",
    "PHOTON",
    "SingleExcState",
    "SystemParams",
    "WerGeometry",
    "b_from_params",
    "discriminant",
    "eigensystem",
    "ep_distance",
    "hamiltonian_matrix",
    "params_from_b",
    "wer_geometry",
    "ConfigError",
    "ConvergenceError",
    "DegenerateBasisError",
    "EPProximityError",
    "FitQualityError",
    "NoTransitionError",
    "PoleProximityError",
    "PostselectionError",
    "RefineGridError",
    "TrackingAmbiguityError",
    "TruncationError",
    "WeylringError",
    "__version__",
]
