"""Heat diffusion through a periodically cracked slab: direct and homogenized solvers."""

from .analysis import drift_profile, energy_audit, epsilon_error, project_homog_to_cracked, sweep_epsilon, transmission_residuals
from .direct import DirectRunConfig, mass_series, run_direct
from .fixed_point import FixedPointRunConfig, coupled_step, run_fixed_point, step_minus, step_plus
from .fv import BoundaryData, Field, assemble_step_system, face_flux_dirichlet, face_trace, solve_linear, step
from .grid import build_cracked_grid, build_interval_grid
from .params import ParamSet, validate_params
from .weak import WeakRunConfig, run_approx, run_profile_variant, run_weak

__version__ = "0.1.0"

__all__ = [
    "BoundaryData", "DirectRunConfig", "Field", "FixedPointRunConfig", "ParamSet", "WeakRunConfig",
    "assemble_step_system", "build_cracked_grid", "build_interval_grid", "coupled_step", "drift_profile",
    "energy_audit", "epsilon_error", "face_flux_dirichlet", "face_trace", "mass_series",
    "project_homog_to_cracked", "run_approx", "run_direct", "run_fixed_point", "run_profile_variant",
    "run_weak", "solve_linear", "step", "step_minus", "step_plus", "sweep_epsilon",
    "transmission_residuals", "validate_params",
]
