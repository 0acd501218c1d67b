"""Coupled-channel simulations of neutral-particle geometric phases with analytic cross-checks."""
from __future__ import annotations

from .fields import DetectorTrace, SpinorField
from .grid import Grid2D, GridSpec, make_grid
from .kernels import BACKEND
from .models import CoupledPotential, SievePotentialParams, SpinFieldParams
from .propagator import Disk, Propagator, PropagatorConfig

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CoupledPotential",
    "DetectorTrace",
    "Disk",
    "Grid2D",
    "GridSpec",
    "Propagator",
    "PropagatorConfig",
    "SievePotentialParams",
    "SpinFieldParams",
    "SpinorField",
    "make_grid",
    "__version__",
]
