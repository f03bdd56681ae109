"""Optimal input states for lossy interferometric phase estimation.

States are symmetric N-probe states in the Dicke basis; candidate optima
come from diagonal matrix product states and are compared with a direct
optimization over all amplitudes.
"""
from .errors import (
    CapabilityError,
    DegenerateStateError,
    DomainError,
    EmptyBranchError,
    NoSignalError,
    OptimizationFailed,
    UndefinedPrecisionError,
)
from .losschan import LossBranch, LossChannel, branch_probabilities, iter_branches
from .mps import DiagonalMPS, canonical_form, from_text, mps_amplitudes, to_text
from .optimize import (
    ObjectiveSpec,
    OptimizationResult,
    OptimizerOptions,
    minimal_bond_dimension,
    optimize_direct,
    optimize_mps,
)
from .qfi import approx_qfi, exact_qfi, loss_qfi_bound, precision_from_qfi, pure_qfi
from .ramsey import collective_moments, ramsey_precision
from .symstate import SymmetricState, noon_state, normalize, product_state
from .sweep import SweepRecord, SweepSpec, run_sweep

__all__ = [
    "CapabilityError", "DegenerateStateError", "DomainError", "EmptyBranchError",
    "NoSignalError", "OptimizationFailed", "UndefinedPrecisionError",
    "LossBranch", "LossChannel", "branch_probabilities", "iter_branches",
    "DiagonalMPS", "canonical_form", "from_text", "mps_amplitudes", "to_text",
    "ObjectiveSpec", "OptimizationResult", "OptimizerOptions",
    "minimal_bond_dimension", "optimize_direct", "optimize_mps",
    "approx_qfi", "exact_qfi", "loss_qfi_bound", "precision_from_qfi", "pure_qfi",
    "collective_moments", "ramsey_precision",
    "SymmetricState", "noon_state", "normalize", "product_state",
    "SweepRecord", "SweepSpec", "run_sweep",
]
