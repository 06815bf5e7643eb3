"""Quantum friction between sliding bodies from guided-mode instabilities.

Locates the complex eigenfrequencies of the hybridized guided-mode
system of two parallel moving bodies (PEC-backed dielectric slabs or
plasmon sheets) and integrates the growth rates into friction-force
spectra, with mutually cross-validating force formulas.  Internal units:
c = hbar = h_s = 1.
"""

from .core import (MovingBody, Polarization, Scenario, SheetMedium,
                   SlabMedium, Units, admittance, doppler, gamma,
                   reflection_sheet, reflection_slab)
from .errors import (BoundaryTooCloseError, BranchLostError,
                     CertificationError, ConfigError, DegenerateInputError,
                     HigherOrderPoleError, NonConvergenceError,
                     OutOfRangeError, PoleError, SaturationError,
                     SupportTruncationError, VacdragError)
from .force import (ForceGrid, ForceResult, ForceTimeSeries,
                    first_excitation_force, force_contour, force_mode_sum,
                    force_pendry_c16, force_time_series, force_weak_coupling,
                    lambda_spectrum, matter_total_ratio, pseudo_momentum_sign)
from .instability import (HybridMode, SelectionSolution, characteristic,
                          count_reflection_poles, find_complex_modes,
                          selection_kx, solve_selection, threshold_velocity,
                          two_pole_mode, winding_count, zero_sum)
from .kernels import backend_name
from .modes import (GuidedModeBranch, GuidedModePoint,
                    branch_intersection_with_index, find_pole_frequencies,
                    residue_at_pole, trace_branch)

__version__ = "0.1.0"

__all__ = [
    "BoundaryTooCloseError", "BranchLostError", "CertificationError",
    "ConfigError", "DegenerateInputError", "ForceGrid", "ForceResult",
    "ForceTimeSeries", "GuidedModeBranch", "GuidedModePoint",
    "HigherOrderPoleError", "HybridMode", "MovingBody",
    "NonConvergenceError", "OutOfRangeError", "PoleError", "Polarization",
    "SaturationError", "Scenario", "SelectionSolution", "SheetMedium",
    "SlabMedium", "SupportTruncationError", "Units", "VacdragError",
    "admittance", "backend_name", "branch_intersection_with_index",
    "characteristic", "count_reflection_poles", "doppler",
    "find_complex_modes", "find_pole_frequencies", "first_excitation_force",
    "force_contour", "force_mode_sum", "force_pendry_c16",
    "force_time_series", "force_weak_coupling", "gamma", "lambda_spectrum",
    "matter_total_ratio", "pseudo_momentum_sign", "reflection_sheet",
    "reflection_slab", "residue_at_pole", "selection_kx", "solve_selection",
    "threshold_velocity", "trace_branch", "two_pole_mode", "winding_count",
    "zero_sum",
]
