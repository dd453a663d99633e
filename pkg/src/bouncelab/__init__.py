"""Numerical laboratory for the semiclassical Schrodinger flow on a half-line
with linear potential: Airy-mode spectral sums, reflection sums, exponential
sums over Airy zeros and desk-scale dispersive scans."""

from .airy import AiryZeroTable, airy_ai, airy_phase, airy_phase_deriv, airy_zeros, load_or_build
from .errors import (
    AccuracyError,
    BounceLabError,
    BranchContinuityError,
    ConvergenceError,
    CoverageError,
    DomainError,
    ParameterError,
    PrecisionError,
)
from .reflection import ReflectionConfig, green_reflection, v_packet
from .spectral import PhysParams, green_dyadic, green_spectral, sup_norm_scan

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "AiryZeroTable",
    "BounceLabError",
    "BranchContinuityError",
    "ConvergenceError",
    "CoverageError",
    "DomainError",
    "ParameterError",
    "PhysParams",
    "PrecisionError",
    "ReflectionConfig",
    "airy_ai",
    "airy_phase",
    "airy_phase_deriv",
    "airy_zeros",
    "green_dyadic",
    "green_reflection",
    "green_spectral",
    "load_or_build",
    "sup_norm_scan",
    "v_packet",
]
