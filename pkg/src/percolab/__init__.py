"""percolab: Monte Carlo and exact-enumeration toolkit for bond percolation on Z^d."""

__version__ = "0.1.0"

from .geometry import (
    Annulus,
    Box,
    Difference,
    Edge,
    FullLattice,
    HalfBox,
    HalfSpace,
    LatticeModel,
    Rect,
    Region,
    boundary,
    neighbors,
    partial_boundary,
    relative_boundary,
)
from .sampler import SamplerConfig, is_open, uniform
from .explorer import Budget, ClusterReport, arm_event, chemical_distance, explore, intrinsic_arm_event, spanning_census
from .estimators import Estimate, TailCurve
from .scaling import FitResult

__all__ = [
    "__version__",
    "Annulus",
    "Box",
    "Budget",
    "ClusterReport",
    "Difference",
    "Edge",
    "Estimate",
    "FitResult",
    "FullLattice",
    "HalfBox",
    "HalfSpace",
    "LatticeModel",
    "Rect",
    "Region",
    "SamplerConfig",
    "TailCurve",
    "arm_event",
    "boundary",
    "chemical_distance",
    "explore",
    "intrinsic_arm_event",
    "is_open",
    "neighbors",
    "partial_boundary",
    "relative_boundary",
    "spanning_census",
    "uniform",
]
