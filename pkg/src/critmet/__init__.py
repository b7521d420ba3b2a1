"""Multiparameter critical metrology with Dicke-type light-matter models.

Closed-form ground-state and Lyapunov-based steady-state quantum Fisher
information matrices for a single cavity and a cavity dimer, together with
precision bounds, sloppiness diagnostics, preparation-time costs and
independent numerical oracles.
"""

from .errors import (
    ConfigError, CritmetError, DomainError, NumericError, PhaseError, PurityError, SloppinessError,
)
from .gs_qfim import QFIMatrix, asymptotic_pair, gs_qfim, gs_qfim_dd, gs_qfim_dm, prefactor_T12
from .metrology import epsilon_expansion_bound, fit_scaling, scalar_bound, sloppiness, subset_qfim
from .models import (
    G, KAPPA, OMEGA_A, OMEGA_C, XI, Model, ModelParams, Trajectory, critical_coupling, k_max,
    mode_spectrum, trajectory_point, triple_point,
)
from .resources import adiabatic_time, relaxation_time, time_normalized_scaling
from .ss_qfim import GaussianState, drift_diffusion, ss_qfim, steady_state

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "CritmetError", "DomainError", "NumericError", "PhaseError", "PurityError",
    "SloppinessError", "QFIMatrix", "asymptotic_pair", "gs_qfim", "gs_qfim_dd", "gs_qfim_dm",
    "prefactor_T12", "epsilon_expansion_bound", "fit_scaling", "scalar_bound", "sloppiness",
    "subset_qfim", "G", "KAPPA", "OMEGA_A", "OMEGA_C", "XI", "Model", "ModelParams", "Trajectory",
    "critical_coupling", "k_max", "mode_spectrum", "trajectory_point", "triple_point",
    "adiabatic_time", "relaxation_time", "time_normalized_scaling", "GaussianState",
    "drift_diffusion", "ss_qfim", "steady_state",
]
