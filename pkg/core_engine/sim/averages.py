"""
Running time-averages and metabolic power/energy traces.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from core_engine.analysis.power import MetabolicCosts, instantaneous_power
from core_engine.controller.motifs import ControllerParams
from core_engine.errors import ParameterError
from .integrator import Trajectory

logger = logging.getLogger(__name__)

DEFAULT_REFINE = 4


def fine_grid(traj: Trajectory, start: float = 0.0, refine: int = DEFAULT_REFINE) -> np.ndarray:
    """
    Solver step times (each interval split ``refine`` times) merged with the sample grid.

    Quadrature on this grid follows the dense output, so oscillations faster than
    the sample spacing are not aliased.
    """
    base = np.union1d(traj.step_times(), traj.times)
    if refine > 1 and base.size > 1:
        fractions = np.arange(refine) / refine
        base = (base[:-1, None] + np.diff(base)[:, None] * fractions[None, :]).ravel()
        base = np.append(base, traj.times[-1])
    base = base[(base >= start) & (base <= traj.t_end)]
    return np.unique(np.concatenate([[start], base]))


def time_average(traj: Trajectory, columns: Optional[List[str]] = None, start: float = 0.0,
                 refine: int = DEFAULT_REFINE) -> pd.DataFrame:
    """
    Running averages (1/(t - start)) int_start^t x(s) ds at the trajectory sample times.

    Returns:
        DataFrame with a ``t`` column and one column per requested species;
        rows before ``start`` are dropped
    """
    if not 0.0 <= start < traj.t_end:
        raise ParameterError(f"Averaging start must be in [0, {traj.t_end}), got {start}")
    columns = columns or list(traj.species_names)
    indices = [traj.species_names.index(c) for c in columns]
    grid = fine_grid(traj, start, refine)
    values = traj.sample(grid)[:, indices]
    integral = cumulative_trapezoid(values, grid, axis=0, initial=0.0)
    elapsed = grid - start
    averages = np.empty_like(values)
    averages[0] = values[0]
    averages[1:] = integral[1:] / elapsed[1:, None]

    keep = traj.times[traj.times >= start]
    frame = pd.DataFrame({'t': keep})
    for j, name in enumerate(columns):
        frame[name] = np.interp(keep, grid, averages[:, j])
    return frame


@dataclass
class EnergyTrace:
    """Power P(t), cumulative energy E(t) and long-run averages of P."""
    times: np.ndarray
    power: np.ndarray
    energy: np.ndarray
    mean_power: float
    tail_mean_power: float

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.times, 'power': self.power, 'energy': self.energy})

    def to_dict(self) -> Dict:
        return {
            'mean_power': self.mean_power,
            'tail_mean_power': self.tail_mean_power,
            'total_energy': float(self.energy[-1]),
        }


def _params_on_grid(traj: Trajectory, grid: np.ndarray, params: Optional[ControllerParams]):
    """Indices into the list of parameter sets, one per grid point."""
    if params is not None:
        return [params], np.zeros(len(grid), dtype=int)
    if not traj.segments:
        raise ParameterError("Controller parameters are required for trajectories without segments")
    if not all(hasattr(s.system, 'params') for s in traj.segments):
        raise ParameterError("System does not expose controller parameters")
    starts = np.array([s.t_start for s in traj.segments])
    owner = np.clip(np.searchsorted(starts, grid, side='right') - 1, 0, len(starts) - 1)
    return [s.system.params for s in traj.segments], owner


def power_trace(traj: Trajectory, costs: MetabolicCosts, params: Optional[ControllerParams] = None,
                refine: int = DEFAULT_REFINE, tail_fraction: float = 0.5) -> EnergyTrace:
    """
    P(t) = kappa_r alpha mu v + kappa_m alpha v y + kappa_a k v and E(t) = int_0^t P.

    Parameters follow the schedule (taken from each segment's system) unless
    ``params`` is given.
    """
    if traj.output_index is None or traj.controller_index is None:
        raise ParameterError("Power needs a trajectory with output and controller species")
    if not 0.0 < tail_fraction <= 1.0:
        raise ParameterError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    grid = fine_grid(traj, 0.0, refine)
    states = traj.sample(grid)
    v = states[:, traj.controller_index]
    y = states[:, traj.output_index]
    parameter_sets, owner = _params_on_grid(traj, grid, params)
    power = np.empty(len(grid))
    for index, segment_params in enumerate(parameter_sets):
        mask = owner == index
        power[mask] = instantaneous_power(segment_params, v[mask], y[mask], costs)
    energy = cumulative_trapezoid(power, grid, initial=0.0)

    horizon = traj.t_end
    mean_power = float(energy[-1] / horizon)
    tail_start = horizon * (1.0 - tail_fraction)
    tail_energy = energy[-1] - np.interp(tail_start, grid, energy)
    tail_mean = float(tail_energy / (horizon - tail_start))
    logger.info(f"[SIM] Mean power {mean_power:.6g}, tail mean {tail_mean:.6g}")
    return EnergyTrace(
        times=traj.times.copy(),
        power=np.interp(traj.times, grid, power),
        energy=np.interp(traj.times, grid, energy),
        mean_power=mean_power,
        tail_mean_power=tail_mean,
    )
