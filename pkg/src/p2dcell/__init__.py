"""Pseudo-2D lithium-ion cell simulator.

A fixed-point (Picard) time stepper over a coupled elliptic potential solve,
spherical solid diffusion, electrolyte diffusion and a lumped heat balance.
"""
from __future__ import annotations

from .coupler import HaltReason, RunOptions, StepReport, TimeSeries, check_monitors, picard_step, run
from .diagnostics import conservation_ledger, soc, voltage
from .kinetics import FluxMode, check_exponent_conditions, flux, flux_decomposed, flux_deta, ocp
from .mesh import Mesh, build_mesh
from .model import CellModel
from .params import (
    CellConfig,
    ConfigError,
    config_from_dict,
    config_to_dict,
    load_config,
    normalize_units,
    reference_config,
    validate_config,
)
from .potentials import EllipticOptions, PotentialSolution, SolverFailure, solve_potentials
from .profile import CurrentProfile, constant_profile, read_profile_csv
from .state import CellState, InadmissibleState, initial_state

__version__ = "0.1.0"

__all__ = [
    "CellConfig",
    "CellModel",
    "CellState",
    "ConfigError",
    "CurrentProfile",
    "EllipticOptions",
    "FluxMode",
    "HaltReason",
    "InadmissibleState",
    "Mesh",
    "PotentialSolution",
    "RunOptions",
    "SolverFailure",
    "StepReport",
    "TimeSeries",
    "build_mesh",
    "check_exponent_conditions",
    "check_monitors",
    "config_from_dict",
    "config_to_dict",
    "conservation_ledger",
    "constant_profile",
    "flux",
    "flux_decomposed",
    "flux_deta",
    "initial_state",
    "load_config",
    "normalize_units",
    "ocp",
    "picard_step",
    "read_profile_csv",
    "reference_config",
    "run",
    "soc",
    "solve_potentials",
    "validate_config",
    "voltage",
]
