"""Canonical Hamiltonian electrodynamics on periodic grids and Poisson mechanics
of charged particles in abelian and Yang-Mills background fields."""

from . import errors, mechanics
from .eb_reference import EBState, plane_wave_fields, plane_wave_state, step_eb
from .grid import Grid, ScalarField, VectorField, curl, div, grad, inv_curl, inv_laplacian, laplacian
from .maxwell import (
    ExtendedState,
    ReducedSourcedState,
    SourceSpec,
    evolve_extended,
    fields_from_extended,
    hamiltonian_extended,
    hamiltonian_reduced,
    lorentz_residual,
    maxwell_residuals,
    reduced_state,
    step_extended,
    step_reduced,
    wave_residuals,
)
from .scenarios import RunReport, ScenarioConfig, list_scenarios, run_scenario

__version__ = "0.1.0"
