"""Deterministic and stochastic simulation of closed loops."""
from .schedule import Schedule, ScheduleEvent, validate_value
from .integrator import DynamicalSystem, Segment, Tolerances, Trajectory, integrate
from .averages import EnergyTrace, fine_grid, power_trace, time_average
from .metrics import TrackingMetrics, detect_oscillation
from .ssa import SsaEnsemble, SsaResult, ssa_ensemble, ssa_simulate

__all__ = [
    'Schedule',
    'ScheduleEvent',
    'validate_value',
    'DynamicalSystem',
    'Segment',
    'Tolerances',
    'Trajectory',
    'integrate',
    'EnergyTrace',
    'fine_grid',
    'power_trace',
    'time_average',
    'TrackingMetrics',
    'detect_oscillation',
    'SsaEnsemble',
    'SsaResult',
    'ssa_ensemble',
    'ssa_simulate',
]
