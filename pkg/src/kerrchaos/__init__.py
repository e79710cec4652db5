"""Simulation and chaos diagnostics for the pulse-kicked Kerr oscillator."""

__version__ = "0.1.0"

from ._ext import BACKEND
from .classical import (
    BifurcationScan,
    bifurcation_scan,
    classical_orbit,
    classical_step,
    classify_window,
    window_boundaries,
)
from .errors import (
    DimensionMismatchError,
    DomainError,
    IndeterminateError,
    InsufficientDataError,
    InvalidDimensionError,
    InvalidParameterError,
    KerrChaosError,
    RadiusTooSmallError,
    TruncationError,
)
from .evolution import (
    EvolutionEngine,
    TrajectoryRecord,
    first_return,
    mean_photon_number,
    recurrence_peak,
    run_trajectory,
)
from .fock import (
    KickMatrix,
    apply_kerr,
    apply_matrix,
    coherent_state,
    make_kerr_diagonal,
    make_kick_matrix,
    make_vacuum,
    unitarity_error,
)
from .params import SystemParams

__all__ = [
    "BACKEND",
    "BifurcationScan",
    "DimensionMismatchError",
    "DomainError",
    "EvolutionEngine",
    "IndeterminateError",
    "InsufficientDataError",
    "InvalidDimensionError",
    "InvalidParameterError",
    "KerrChaosError",
    "KickMatrix",
    "RadiusTooSmallError",
    "SystemParams",
    "TrajectoryRecord",
    "TruncationError",
    "__version__",
    "apply_kerr",
    "apply_matrix",
    "bifurcation_scan",
    "classical_orbit",
    "classical_step",
    "classify_window",
    "coherent_state",
    "first_return",
    "make_kerr_diagonal",
    "make_kick_matrix",
    "make_vacuum",
    "mean_photon_number",
    "recurrence_peak",
    "run_trajectory",
    "unitarity_error",
    "window_boundaries",
]
