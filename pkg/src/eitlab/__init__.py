"""Numerical laboratory for boundary-data stability of holomorphic surface images.

The package computes Dirichlet-to-Neumann operators of model surfaces,
completes and transports holomorphic boundary traces, reconstructs immersed
image clouds from boundary data via contour integrals, and measures the
Hausdorff stability of the reconstruction under perturbations of the
boundary data.
"""

from .boundary import BoundaryFunction, BoundaryOperator
from .dn import ConformalDomain, TriMesh, dn_conformal, dn_disk, dn_fem
from .holomorphic import (
    ProjectionPair,
    TraceTuple,
    build_projections,
    complete_trace,
    dn_distance,
    estimate_kappa,
    transport_immersion,
)
from .argument import ReconstructedCloud, WindingField, classify, reconstruct
from .metrics import HausdorffResult, hausdorff
from .errors import EitlabError

__version__ = "0.1.0"

__all__ = [
    "BoundaryFunction",
    "BoundaryOperator",
    "ConformalDomain",
    "TriMesh",
    "dn_disk",
    "dn_conformal",
    "dn_fem",
    "TraceTuple",
    "ProjectionPair",
    "estimate_kappa",
    "build_projections",
    "complete_trace",
    "transport_immersion",
    "dn_distance",
    "WindingField",
    "ReconstructedCloud",
    "classify",
    "reconstruct",
    "HausdorffResult",
    "hausdorff",
    "EitlabError",
    "__version__",
]
