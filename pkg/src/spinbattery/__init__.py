"""Collective spin-charger quantum battery simulator."""

from .dicke import HermitianOperator, ProductBasis, SpinSector, build_collective, ladder_element
from .errors import (
    CutoffConvergenceError,
    EigensolverError,
    KrylovConvergenceError,
    NumericalError,
    SpinBatteryError,
)
from .hamiltonians import (
    ModelParams,
    TcParams,
    build_single_cell,
    build_spin_charger,
    build_tc,
    ideal_initial_state,
)
from .observables import ChargingSummary, ChargingTrace, HorizonWarning, charging_trace, summarize
from .propagation import MixedState, TimeGrid, Trajectory, evolve_mixture, krylov_propagate, spectral_propagate

__version__ = "0.1.0"

__all__ = [
    "ChargingSummary",
    "ChargingTrace",
    "CutoffConvergenceError",
    "EigensolverError",
    "HermitianOperator",
    "HorizonWarning",
    "KrylovConvergenceError",
    "MixedState",
    "ModelParams",
    "NumericalError",
    "ProductBasis",
    "SpinBatteryError",
    "SpinSector",
    "TcParams",
    "TimeGrid",
    "Trajectory",
    "build_collective",
    "build_single_cell",
    "build_spin_charger",
    "build_tc",
    "charging_trace",
    "evolve_mixture",
    "ideal_initial_state",
    "krylov_propagate",
    "ladder_element",
    "spectral_propagate",
    "summarize",
]
