"""Correlation-matrix visualizations for pairs of spins.

The package computes two-spin Bloch vectors and correlation matrices for
static states and for several many-body models, classifies the resulting
shapes, and extracts level-set meshes of their angular profiles.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    GridTooCoarse,
    IoError,
    NoLevelSet,
    NonPhysicalDensity,
    NonPhysicalObservables,
    NotSymmetric,
    NotUnit,
    ParseError,
    QuadratureNotConverged,
    SpinCMVError,
    StepSizeTooLarge,
    TruncationError,
    UnvalidatedRegime,
)
from .spin import (
    IrreducibleParts,
    PairObservables,
    ShapeClass,
    ShapeLabel,
    classify_shape,
    connected_three_spin,
    density_from_pair_observables,
    irreducible_decompose,
    pair_observables_from_density,
    real_spherical_harmonic,
    spherical_profile,
)
from .states import PRESETS, preset_density

__all__ = [
    "ConfigError",
    "GridTooCoarse",
    "IoError",
    "IrreducibleParts",
    "NoLevelSet",
    "NonPhysicalDensity",
    "NonPhysicalObservables",
    "NotSymmetric",
    "NotUnit",
    "PRESETS",
    "PairObservables",
    "ParseError",
    "QuadratureNotConverged",
    "ShapeClass",
    "ShapeLabel",
    "SpinCMVError",
    "StepSizeTooLarge",
    "TruncationError",
    "UnvalidatedRegime",
    "classify_shape",
    "connected_three_spin",
    "density_from_pair_observables",
    "irreducible_decompose",
    "pair_observables_from_density",
    "preset_density",
    "real_spherical_harmonic",
    "spherical_profile",
]
