"""
Deviation of a compiled circuit from the ideal formal dynamics.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from core_engine.errors import ParameterError
from core_engine.sim.integrator import Trajectory

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 2000


@dataclass
class ComparisonMetrics:
    max_abs_deviation: Dict[str, float]
    rms_deviation: Dict[str, float]
    divergence_time: Optional[float]
    band: float

    @property
    def worst(self) -> float:
        return max(self.max_abs_deviation.values()) if self.max_abs_deviation else 0.0

    def to_dict(self) -> Dict:
        return {
            'max_abs_deviation': self.max_abs_deviation,
            'rms_deviation': self.rms_deviation,
            'divergence_time': self.divergence_time,
            'band': self.band,
        }

    def __str__(self) -> str:
        lines = [f"Deviation band: {self.band:g} nM"]
        for name in self.max_abs_deviation:
            lines.append(f"  {name}: max {self.max_abs_deviation[name]:.6g}, rms {self.rms_deviation[name]:.6g}")
        if self.divergence_time is None:
            lines.append("  No divergence beyond the band")
        else:
            lines.append(f"  Diverges at t={self.divergence_time:g}")
        return '\n'.join(lines)


def _resolve_map(ideal: Trajectory, dsd: Trajectory, species_map: Optional[Dict[str, str]]) -> Dict[str, str]:
    if species_map is None:
        species_map = {name: name for name in ideal.species_names if name in dsd.species_names}
    for ideal_name, dsd_name in species_map.items():
        if ideal_name not in ideal.species_names or dsd_name not in dsd.species_names:
            raise ParameterError(f"Cannot compare {ideal_name} with {dsd_name}: species missing")
    if not species_map:
        raise ParameterError("No common species to compare")
    return species_map


def _common_grid(ideal: Trajectory, dsd: Trajectory, grid) -> np.ndarray:
    if grid is not None:
        return np.asarray(grid, dtype=float)
    horizon = min(ideal.t_end, dsd.t_end)
    return np.linspace(0.0, horizon, DEFAULT_GRID_POINTS)


def comparison_frame(ideal: Trajectory, dsd: Trajectory, species_map: Optional[Dict[str, str]] = None,
                     grid=None) -> pd.DataFrame:
    """Ideal and circuit values of the signal species on a common grid, with deviations."""
    species_map = _resolve_map(ideal, dsd, species_map)
    grid = _common_grid(ideal, dsd, grid)
    ideal_values = ideal.sample(grid)
    dsd_values = dsd.sample(grid)
    frame = pd.DataFrame({'t': grid})
    for ideal_name, dsd_name in species_map.items():
        a = ideal_values[:, ideal.species_names.index(ideal_name)]
        b = dsd_values[:, dsd.species_names.index(dsd_name)]
        frame[f"ideal_{ideal_name}"] = a
        frame[f"dsd_{ideal_name}"] = b
        frame[f"deviation_{ideal_name}"] = np.abs(a - b)
    return frame


def compare_traces(ideal: Trajectory, dsd: Trajectory, species_map: Optional[Dict[str, str]] = None,
                   band: float = 0.05, grid=None) -> ComparisonMetrics:
    """
    Compare signal species only (gates, messengers and waste are ignored).

    Args:
        ideal: Trajectory of the formal closed loop
        dsd: Trajectory of the compiled circuit
        species_map: ideal name -> circuit name (defaults to shared names)
        band: Absolute deviation (nM) defining divergence
        grid: Common sample times (defaults to a uniform grid on the shared span)
    """
    if band < 0:
        raise ParameterError(f"band must be >= 0, got {band}")
    frame = comparison_frame(ideal, dsd, species_map, grid)
    names: List[str] = [c[len('deviation_'):] for c in frame.columns if c.startswith('deviation_')]
    max_dev = {name: float(frame[f"deviation_{name}"].max()) for name in names}
    rms_dev = {name: float(np.sqrt(np.mean(frame[f"deviation_{name}"] ** 2))) for name in names}
    exceeded = (frame[[f"deviation_{n}" for n in names]] > band).any(axis=1).to_numpy()
    divergence = float(frame['t'].to_numpy()[np.argmax(exceeded)]) if exceeded.any() else None
    metrics = ComparisonMetrics(max_abs_deviation=max_dev, rms_deviation=rms_dev,
                                divergence_time=divergence, band=float(band))
    logger.info(f"[DSD] Max deviation {metrics.worst:.6g} nM, divergence time {divergence}")
    return metrics
