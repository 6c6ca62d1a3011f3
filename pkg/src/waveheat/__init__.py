"""Coupled heat-wave transmission problem: discrete generator, spectra,
resolvent sweeps, time stepping and Carleman-weight verifiers."""
from .errors import ConfigError, NumericalError, SpectralHitError
from .evolution import fit_decay, simulate, step
from .generator import (Generator, StateLayout, SystemState, apply_generator,
                        assemble_generator, energy, heat_dissipation)
from .geometry import DomainConfig, Grid, build_grid
from .spectral import eigenvalues, resolvent_apply, resolvent_norm, resolvent_sweep

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DomainConfig", "Generator", "Grid", "NumericalError", "SpectralHitError",
    "StateLayout", "SystemState", "apply_generator", "assemble_generator", "build_grid",
    "eigenvalues", "energy", "fit_decay", "heat_dissipation", "resolvent_apply",
    "resolvent_norm", "resolvent_sweep", "simulate", "step",
]
