"""
Deterministic integration of closed loops under stepped parameter schedules.

Integration restarts at every schedule event with the updated system, so
parameter discontinuities never fall inside a step. Each segment keeps its dense
output, which is what :meth:`Trajectory.sample` evaluates.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from core_engine.errors import IntegrationError, ParameterError
from .schedule import Schedule

logger = logging.getLogger(__name__)

EXPLICIT_METHODS = ('RK45', 'RK23', 'DOP853')
IMPLICIT_METHODS = ('LSODA', 'Radau', 'BDF')


class DynamicalSystem(Protocol):
    """What :func:`integrate` needs: ClosedLoop and DsdCircuit both provide it."""

    @property
    def species_names(self) -> List[str]: ...

    @property
    def output_index(self) -> int: ...

    @property
    def controller_index(self) -> int: ...

    def initial_state(self) -> np.ndarray: ...

    def rhs(self, t: float, x: np.ndarray) -> np.ndarray: ...

    def jacobian(self, t: float, x: np.ndarray) -> np.ndarray: ...

    def with_parameter(self, target: str, value: float) -> 'DynamicalSystem': ...


@dataclass(frozen=True)
class Tolerances:
    rtol: float = 1e-8
    atol: float = 1e-10
    method: str = 'RK45'
    max_step: float = float('inf')

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ParameterError(f"Tolerances must be > 0, got rtol={self.rtol} atol={self.atol}")
        if self.method not in EXPLICIT_METHODS + IMPLICIT_METHODS:
            raise ParameterError(f"Unknown integration method: {self.method}")
        if not self.max_step > 0:
            raise ParameterError(f"max_step must be > 0, got {self.max_step}")

    @property
    def uses_jacobian(self) -> bool:
        return self.method in IMPLICIT_METHODS


@dataclass
class Segment:
    """One integration interval between schedule events."""
    t_start: float
    t_end: float
    system: DynamicalSystem
    solution: Optional[object]
    step_times: np.ndarray
    step_states: np.ndarray

    def evaluate(self, times: np.ndarray) -> np.ndarray:
        if self.solution is None:
            return np.tile(self.step_states[:, -1], (len(times), 1))
        return np.asarray(self.solution(times)).T.reshape(len(times), -1)


@dataclass
class Trajectory:
    """
    Sampled states (rows = times, columns = species) with the dense output of
    every segment kept for resampling.
    """
    times: np.ndarray
    states: np.ndarray
    species_names: List[str]
    output_index: Optional[int] = None
    controller_index: Optional[int] = None
    segments: List[Segment] = field(default_factory=list)

    @classmethod
    def from_samples(cls, times, states, species_names: Sequence[str],
                     output_index: Optional[int] = None,
                     controller_index: Optional[int] = None) -> 'Trajectory':
        """Trajectory without dense output; resampling falls back to linear interpolation."""
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float).reshape(len(times), -1)
        return cls(times=times, states=states, species_names=list(species_names),
                   output_index=output_index, controller_index=controller_index)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def output(self) -> np.ndarray:
        if self.output_index is None:
            raise ParameterError("Trajectory has no designated output species")
        return self.states[:, self.output_index]

    @property
    def controller(self) -> np.ndarray:
        if self.controller_index is None:
            raise ParameterError("Trajectory has no controller species")
        return self.states[:, self.controller_index]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.states[:, self.species_names.index(name)]
        except ValueError:
            raise ParameterError(f"Unknown species in trajectory: {name}")

    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    def sample(self, times) -> np.ndarray:
        """States at arbitrary times within the span, clipped at 0."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < self.times[0] - 1e-12) or np.any(times > self.times[-1] + 1e-12):
            raise ParameterError("Requested times fall outside the trajectory span")
        if not self.segments:
            values = np.column_stack([np.interp(times, self.times, self.states[:, j])
                                      for j in range(self.states.shape[1])])
            return np.maximum(values, 0.0)
        values = np.empty((len(times), len(self.species_names)))
        starts = np.array([s.t_start for s in self.segments])
        owner = np.clip(np.searchsorted(starts, times, side='right') - 1, 0, len(self.segments) - 1)
        for index in np.unique(owner):
            mask = owner == index
            values[mask] = self.segments[index].evaluate(times[mask])
        return np.maximum(values, 0.0)

    def system_at(self, t: float) -> DynamicalSystem:
        """System (parameters) in force at time t."""
        if not self.segments:
            raise ParameterError("Trajectory carries no segment information")
        current = self.segments[0]
        for segment in self.segments:
            if segment.t_start <= t:
                current = segment
        return current.system

    def step_times(self) -> np.ndarray:
        """Raw adaptive step times across all segments."""
        if not self.segments:
            return self.times.copy()
        return np.concatenate([s.step_times for s in self.segments])

    def raw_frame(self) -> pd.DataFrame:
        """Solver steps (not resampled), one row per accepted step."""
        if not self.segments:
            return self.to_dataframe()
        times = self.step_times()
        states = np.concatenate([s.step_states.T for s in self.segments], axis=0)
        frame = pd.DataFrame(states, columns=self.species_names)
        frame.insert(0, 't', times)
        return frame

    def to_dataframe(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.states, columns=self.species_names)
        frame.insert(0, 't', self.times)
        return frame

    def to_dict(self) -> Dict:
        return {
            't_end': self.t_end,
            'samples': int(len(self.times)),
            'species': self.species_names,
            'final_state': self.final_state().tolist(),
            'segments': len(self.segments),
        }


def _check_segment(solution, t_start: float, t_end: float, tolerances: Tolerances) -> np.ndarray:
    if solution.status < 0:
        raise IntegrationError(f"Integration failed on [{t_start:g}, {t_end:g}]: {solution.message}")
    y = solution.y
    if not np.all(np.isfinite(y)):
        raise IntegrationError(f"Non-finite state on [{t_start:g}, {t_end:g}]")
    # dips within atol are clipped by the caller
    worst = y.min(axis=1)
    bad = np.flatnonzero(worst < -tolerances.atol)
    if bad.size:
        raise IntegrationError(
            f"State component {int(bad[0])} went negative ({worst[bad[0]]:.3g}) on [{t_start:g}, {t_end:g}]"
        )
    return y


def integrate(
    system: DynamicalSystem,
    schedule: Optional[Schedule] = None,
    t_end: float = 100.0,
    tolerances: Optional[Tolerances] = None,
    samples: int = 1000,
    initial_state=None,
) -> Trajectory:
    """
    Integrate ``system`` on [0, t_end], applying schedule events as they come.

    Args:
        system: Closed loop or compiled circuit
        schedule: Parameter steps (None for constant parameters)
        t_end: Final time (s)
        tolerances: rtol/atol/method; defaults to RK45 with rtol=1e-8, atol=1e-10
        samples: Size of the uniform output grid
        initial_state: Overrides the system's initial state

    Returns:
        Trajectory sampled on ``samples`` points, with segment dense outputs

    Raises:
        ParameterError: Bad horizon, negative initial state or invalid schedule value
        IntegrationError: Solver failure, non-finite or negative state
    """
    if not t_end > 0:
        raise ParameterError(f"t_end must be > 0, got {t_end}")
    if samples < 2:
        raise ParameterError(f"samples must be >= 2, got {samples}")
    tolerances = tolerances or Tolerances()
    schedule = schedule or Schedule.empty()

    state = system.initial_state() if initial_state is None else np.asarray(initial_state, dtype=float)
    state = np.asarray(state, dtype=float).copy()
    if state.shape[0] != len(system.species_names):
        raise ParameterError(f"Initial state has {state.shape[0]} entries, system has {len(system.species_names)}")
    if np.any(state < 0):
        raise ParameterError("Initial state must be nonnegative")

    segments: List[Segment] = []
    current = system
    for t_start, t_stop, event in schedule.segments(t_end):
        if event is not None:
            logger.info(f"[SIM] t={event.time:g}: {event.target} -> {event.value:g}")
            current = current.with_parameter(event.target, event.value)
        if t_stop <= t_start:
            continue
        options = dict(method=tolerances.method, rtol=tolerances.rtol, atol=tolerances.atol,
                       max_step=tolerances.max_step, dense_output=True)
        if tolerances.uses_jacobian:
            options['jac'] = current.jacobian
        solution = solve_ivp(current.rhs, (t_start, t_stop), state, **options)
        y = _check_segment(solution, t_start, t_stop, tolerances)
        segments.append(Segment(t_start=t_start, t_end=t_stop, system=current, solution=solution.sol,
                                step_times=solution.t, step_states=y))
        state = np.maximum(y[:, -1], 0.0)
        logger.debug(f"[SIM] Segment [{t_start:g}, {t_stop:g}] took {solution.t.size} steps")

    grid = np.linspace(0.0, float(t_end), samples)
    trajectory = Trajectory(times=grid, states=np.zeros((samples, len(system.species_names))),
                            species_names=list(system.species_names),
                            output_index=system.output_index,
                            controller_index=system.controller_index,
                            segments=segments)
    trajectory.states = trajectory.sample(grid)
    logger.info(f"[SIM] Integrated to t={t_end:g} in {len(segments)} segment(s), "
                f"{trajectory.step_times().size} steps")
    return trajectory
