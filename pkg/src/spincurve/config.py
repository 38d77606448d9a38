"""Numerical tolerances shared across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    construction: float = 1e-12     # unit-norm check when a quaternion is built
    unit_input: float = 1e-8        # covering maps reject inputs further from |z| = 1
    orthogonality: float = 1e-10    # Q^T Q = I, det Q = 1
    so_membership: float = 1e-8     # looser check for matrices coming from integration
    round_trip: float = 1e-8        # pi4(so4_to_spin(R)) = R
    pivot: float = 1e-9             # Bruhat pivot threshold, relative to column norm
    lift_jump: float = 0.5          # max ambient distance between consecutive lifts
    frame_identity: float = 1e-6    # F(t) = I detection for multiconvexity
    tangency: float = 1e-10         # circle tangency residual in the nu construction
    power_iteration: float = 1e-12


TOL = Tolerances()

DEFAULT_GRID = 1024
MIN_GRID = 16
