"""Integral controller motifs (ideal and Hill-approximate)."""
from .motifs import (
    ACTUATION,
    CONTROLLER_SPECIES,
    MEASUREMENT,
    REFERENCE,
    ClosedLoop,
    ControllerParams,
    HillParams,
    attach_hill_controller,
    attach_integral_controller,
    disturbance_matrix,
)

__all__ = [
    'ControllerParams',
    'HillParams',
    'ClosedLoop',
    'attach_integral_controller',
    'attach_hill_controller',
    'disturbance_matrix',
    'CONTROLLER_SPECIES',
    'REFERENCE',
    'MEASUREMENT',
    'ACTUATION',
]
