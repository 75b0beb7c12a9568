"""Branched laminates for the cubic-to-tetragonal transformation.

Exact piecewise-affine competitors for the singularly perturbed two-well
energy, their elastic/surface energies, scaling-law sweeps, and Fourier
cone-localization diagnostics.
"""

from . import wells as tensor_wells
from .wells import (
    classify,
    construction_gradients,
    edge_datum_gradients,
    frame,
    normal_table,
    twin_identity,
)
from .params import BranchParams, make_params

__all__ = [
    "tensor_wells",
    "classify",
    "construction_gradients",
    "edge_datum_gradients",
    "frame",
    "normal_table",
    "twin_identity",
    "BranchParams",
    "make_params",
]
