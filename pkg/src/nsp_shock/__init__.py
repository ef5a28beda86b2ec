"""Viscous ion-acoustic shock profiles of the Navier-Stokes-Poisson system.

Modules: far-field algebra (``rankine_hugoniot``), the full profile boundary
value problem (``profile_ode``), the KdV-Burgers approximation
(``kdv_burgers``, ``approximation``), time evolution in Lagrangian mass
coordinates (``evolution``), energy functionals (``energy``), and the
command-line interface (``cli``).
"""

from .rankine_hugoniot import (
    EquilibriumState,
    LagrangianEquilibrium,
    PlasmaParams,
    ScalingParams,
    parametrize_downstream,
    rh_residual_eulerian,
    rh_residual_lagrangian,
)
from .profile_ode import GridSpec, ProfileSolution, SolverOptions, solve_profile
from .kdv_burgers import KdvbGrid, KdvbProfile, solve_kdvb
from .approximation import ZGrid, build_first_order, build_scaled_profile, compute_remainder_direct
from .evolution import LagrangianState, PerturbationSpec, Trajectory, evolve, make_initial, step
from .energy import EnergyReport, stability_verdict

__version__ = "0.1.0"

__all__ = [
    "EnergyReport",
    "EquilibriumState",
    "GridSpec",
    "KdvbGrid",
    "KdvbProfile",
    "LagrangianEquilibrium",
    "LagrangianState",
    "PerturbationSpec",
    "PlasmaParams",
    "ProfileSolution",
    "ScalingParams",
    "SolverOptions",
    "Trajectory",
    "ZGrid",
    "build_first_order",
    "build_scaled_profile",
    "compute_remainder_direct",
    "evolve",
    "make_initial",
    "parametrize_downstream",
    "rh_residual_eulerian",
    "rh_residual_lagrangian",
    "solve_kdvb",
    "solve_profile",
    "stability_verdict",
    "step",
]
