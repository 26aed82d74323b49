"""
Tracking and adaptation metrics computed from trajectories.
"""
from typing import Dict, List, Optional

import numpy as np

from core_engine.errors import ParameterError
from .integrator import Trajectory

SEGMENT_POINTS = 1000


class TrackingMetrics:
    """Set-point tracking metrics per schedule segment."""

    @staticmethod
    def segment_metrics(traj: Trajectory, t_start: float, t_end: float, mu: float,
                        settling_fraction: float = 0.4, band: float = 0.01) -> Dict:
        """
        Metrics for one constant-parameter interval.

        The settled window starts ``settling_fraction`` of the way into the interval;
        ``adapted`` means |y - mu| < band * mu everywhere in it.
        """
        times = np.linspace(t_start, t_end, SEGMENT_POINTS)
        y = traj.sample(times)[:, traj.output_index]
        error = np.abs(y - mu)
        tolerance = band * mu

        window = times >= t_start + settling_fraction * (t_end - t_start)
        max_settled = float(error[window].max())

        outside = np.flatnonzero(error >= tolerance)
        if outside.size == 0:
            settling_time = 0.0
        elif outside[-1] == len(times) - 1:
            settling_time = None
        else:
            settling_time = float(times[outside[-1] + 1] - t_start)

        return {
            't_start': float(t_start),
            't_end': float(t_end),
            'mu': float(mu),
            'final_error': float(error[-1]),
            'max_settled_error': max_settled,
            'settling_time': settling_time,
            'adapted': bool(max_settled < tolerance),
        }

    @staticmethod
    def calculate_metrics(traj: Trajectory, settling_fraction: float = 0.4, band: float = 0.01) -> Dict:
        """
        Calculate tracking metrics for every schedule segment of ``traj``.

        Args:
            traj: Trajectory produced by integrate (segments carry the set-point)
            settling_fraction: Fraction of each interval allowed for settling
            band: Relative tracking band around mu

        Returns:
            Dictionary with per-segment metrics and overall flags
        """
        if traj.output_index is None or traj.controller_index is None:
            raise ParameterError("Tracking metrics need output and controller species")
        if not 0.0 <= settling_fraction < 1.0:
            raise ParameterError(f"settling_fraction must be in [0, 1), got {settling_fraction}")
        if not traj.segments:
            raise ParameterError("Tracking metrics need a trajectory with segment information")

        segments: List[Dict] = []
        for segment in traj.segments:
            mu = segment.system.params.mu
            segments.append(TrackingMetrics.segment_metrics(
                traj, segment.t_start, segment.t_end, mu, settling_fraction, band,
            ))

        v = traj.controller
        oscillation = detect_oscillation(traj)
        return {
            'segments': segments,
            'adapted': all(s['adapted'] for s in segments),
            'final_error': segments[-1]['final_error'],
            'min_v': float(v.min()),
            'oscillating': oscillation['oscillating'],
            'oscillation_amplitude': oscillation['amplitude'],
        }


def detect_oscillation(traj: Trajectory, window_fraction: float = 0.25,
                       relative_threshold: float = 0.01, column: Optional[str] = None) -> Dict:
    """
    Peak-to-peak amplitude of the output over the trailing window.

    The trajectory is flagged oscillating when that amplitude exceeds
    ``relative_threshold`` times the window mean.
    """
    if column is None:
        values_index = traj.output_index
    else:
        values_index = traj.species_names.index(column)
    t_from = traj.t_end * (1.0 - window_fraction)
    times = np.linspace(t_from, traj.t_end, SEGMENT_POINTS)
    values = traj.sample(times)[:, values_index]
    amplitude = float(values.max() - values.min())
    mean = float(values.mean())
    return {
        'amplitude': amplitude,
        'mean': mean,
        'oscillating': bool(amplitude > relative_threshold * max(abs(mean), 1e-12)),
    }
