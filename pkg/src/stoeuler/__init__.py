"""Stochastic isentropic Euler and shallow-water ensembles on the unit torus.

The package splits time into deterministic viscous steps and stochastic
momentum kicks, runs Monte Carlo ensembles of that scheme and evaluates
kinetic entropy pairs, energy balance and Young-measure diagnostics.
"""
from .core import NORMALIZED, SHALLOW_WATER, ConservedField, DomainError, GasLaw, Grid, RiemannPair
from .dynamics import BlowUpError, NegativeDensityError, SchemeConfig, SchemeError, det_step, split_advance, sto_step
from .ensemble import EnsembleConfig, EnsembleStats, SnapshotStore, YoungHistogram, run_ensemble
from .noise import NoiseModel, localize, sw_height_modes, sw_topography_modes, zero_noise
from .quadrature import JacobiQuadrature

__version__ = "0.1.0"

__all__ = [
    "NORMALIZED",
    "SHALLOW_WATER",
    "BlowUpError",
    "ConservedField",
    "DomainError",
    "EnsembleConfig",
    "EnsembleStats",
    "GasLaw",
    "Grid",
    "JacobiQuadrature",
    "NegativeDensityError",
    "NoiseModel",
    "RiemannPair",
    "SchemeConfig",
    "SchemeError",
    "SnapshotStore",
    "YoungHistogram",
    "det_step",
    "localize",
    "run_ensemble",
    "split_advance",
    "sto_step",
    "sw_height_modes",
    "sw_topography_modes",
    "zero_noise",
]
