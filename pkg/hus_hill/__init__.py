"""
hus-hill - Hyers-Ulam stability of periodic h-difference equations

Computes stability verdicts and constants for first-order, discrete Hill
and third-order linear h-difference equations with n-cycle coefficients,
and certifies the constants by building exact tracking solutions near
ε-perturbed trajectories.
"""

__version__ = "0.1.0"
__author__ = "hus-hill Contributors"
__license__ = "MIT"

from hus_hill.models import (
    EquationSpec,
    Family,
    OracleEstimate,
    PeriodicCycle,
    ProfilePattern,
    ResidualProfile,
    Sign,
    SSums,
    StabilityReport,
    TrackingResult,
    Trajectory,
    Verdict,
)
from hus_hill.stability import build_equation, composite_constant, k0_constant, s_sums, stability_report
from hus_hill.dynamics import perturb, residual, simulate
from hus_hill.tracking import track
from hus_hill.oracle import extremal_ratio_oracle

__all__ = [
    "EquationSpec",
    "Family",
    "OracleEstimate",
    "PeriodicCycle",
    "ProfilePattern",
    "ResidualProfile",
    "Sign",
    "SSums",
    "StabilityReport",
    "TrackingResult",
    "Trajectory",
    "Verdict",
    "build_equation",
    "composite_constant",
    "k0_constant",
    "s_sums",
    "stability_report",
    "perturb",
    "residual",
    "simulate",
    "track",
    "extremal_ratio_oracle",
]
