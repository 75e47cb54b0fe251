"""Bergman-space geometry of the Siegel upper half-space and Carleson-measure diagnostics."""

from .geometry import CPoint, DomainError, origin_point
from .integrate import IntegrationResult, RegionSpec
from .kernel import bergman_kernel, kernel_norm, normalized_kernel
from .metric import BergmanBall, ball_volume, bergman_distance
from .lattice import Lattice, build_lattice
from .measures import Atomic, Lebesgue, NamedDensity, averaging, berezin, measure_from_json, measure_to_json
from .carleson import DiagnoseConfig, DiagnosticsReport, diagnose, duality_check, toeplitz_apply

__version__ = "0.1.0"

__all__ = [
    "Atomic",
    "BergmanBall",
    "CPoint",
    "DiagnoseConfig",
    "DiagnosticsReport",
    "DomainError",
    "IntegrationResult",
    "Lattice",
    "Lebesgue",
    "NamedDensity",
    "RegionSpec",
    "averaging",
    "ball_volume",
    "berezin",
    "bergman_distance",
    "bergman_kernel",
    "build_lattice",
    "diagnose",
    "duality_check",
    "kernel_norm",
    "measure_from_json",
    "measure_to_json",
    "normalized_kernel",
    "toeplitz_apply",
]
