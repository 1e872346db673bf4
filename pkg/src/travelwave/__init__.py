"""Finite traveling waves of doubly degenerate reaction-diffusion equations.

The wave profile is computed through the phase-plane trajectory
``upsilon(theta)`` through the degenerate origin and the travel-time
quadrature that maps it back to ``phi(z)``.
"""
from __future__ import annotations

from .errors import (
    BracketStall,
    DomainError,
    IntegrationFailure,
    QuadratureFailure,
    RangeExceeded,
    TravelWaveError,
    UncoveredRegime,
)
from .model import (
    AsymptoteSpec,
    Balance,
    End,
    ModelParams,
    Regime,
    SpeedSign,
    c_star,
    classify_regime,
    critical_curve,
    phase_rhs,
    profile_asymptote,
    trajectory_asymptote,
    validate_params,
)
from .phase_plane import (
    BracketPair,
    Trajectory,
    bracket_trajectory,
    eval_trajectory,
    solve_regularized_lower,
    solve_regularized_upper,
    solve_trajectory,
)
from .profile import Profile, profile_flux, reconstruct_profile, travel_time
from .verify import VerificationReport, run_verification

__version__ = "0.1.0"
