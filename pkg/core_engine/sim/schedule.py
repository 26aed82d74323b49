"""
Stepped parameter schedules.

A schedule is an ordered list of (time, target, value) events. Targets use the
parameter paths understood by ClosedLoop.with_parameter: ``controller.mu``,
``controller.alpha``, ``controller.k``, ``hill.theta``, ``rate.<label>`` and
``disturbance.d.<index>``.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from core_engine.errors import ParameterError

POSITIVE_PREFIXES = ('controller.', 'rate.', 'hill.')
NONNEGATIVE_PREFIXES = ('disturbance.',)


def validate_value(target: str, value: float) -> float:
    """Check a new value against the domain of its parameter."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{target}: value {value!r} is not a number")
    if not np.isfinite(value):
        raise ParameterError(f"{target}: value must be finite, got {value}")
    if target.startswith(POSITIVE_PREFIXES):
        if value <= 0:
            raise ParameterError(f"{target} must be > 0, got {value}")
    elif target.startswith(NONNEGATIVE_PREFIXES):
        if value < 0:
            raise ParameterError(f"{target} must be >= 0, got {value}")
    else:
        raise ParameterError(f"Unknown parameter path: {target}")
    return value


@dataclass(frozen=True)
class ScheduleEvent:
    time: float
    target: str
    value: float

    def __post_init__(self):
        time = float(self.time)
        if not np.isfinite(time) or time < 0:
            raise ParameterError(f"Event time must be finite and >= 0, got {self.time}")
        object.__setattr__(self, 'time', time)
        object.__setattr__(self, 'value', validate_value(self.target, self.value))

    def to_dict(self) -> Dict:
        return {'time': self.time, 'target': self.target, 'value': self.value}


@dataclass(frozen=True)
class Schedule:
    """
    Events with strictly increasing times.

    Several parameters changing at the same instant are written as one event
    per time; use :meth:`merged` to combine schedules on different targets.
    """
    events: Tuple[ScheduleEvent, ...] = ()

    def __post_init__(self):
        events = tuple(self.events)
        for earlier, later in zip(events, events[1:]):
            if later.time <= earlier.time:
                raise ParameterError(
                    f"Schedule times must be strictly increasing: {earlier.time} then {later.time}"
                )
        object.__setattr__(self, 'events', events)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def times(self) -> List[float]:
        return [e.time for e in self.events]

    @property
    def targets(self) -> List[str]:
        return sorted({e.target for e in self.events})

    @classmethod
    def empty(cls) -> 'Schedule':
        return cls(())

    @classmethod
    def from_events(cls, events: Iterable) -> 'Schedule':
        """Build from ScheduleEvent objects, dicts or (time, target, value) tuples."""
        parsed = []
        for event in events:
            if isinstance(event, ScheduleEvent):
                parsed.append(event)
            elif isinstance(event, dict):
                try:
                    parsed.append(ScheduleEvent(event['time'], event['target'], event['value']))
                except KeyError as e:
                    raise ParameterError(f"Schedule event {event} is missing {e}")
            else:
                time, target, value = event
                parsed.append(ScheduleEvent(time, target, value))
        return cls(tuple(sorted(parsed, key=lambda e: e.time)))

    @classmethod
    def random_steps(cls, target: str, start: float, interval: float, count: int,
                     low: float, high: float, seed: int = 0) -> 'Schedule':
        """
        Piecewise-constant random profile: ``count`` values drawn uniformly in
        [low, high] at times start, start + interval, ...
        """
        if interval <= 0 or count < 0:
            raise ParameterError("random_steps needs interval > 0 and count >= 0")
        if high < low:
            raise ParameterError(f"random_steps needs low <= high, got [{low}, {high}]")
        rng = np.random.default_rng(seed)
        values = rng.uniform(low, high, size=count)
        return cls(tuple(
            ScheduleEvent(start + i * interval, target, float(value))
            for i, value in enumerate(values)
        ))

    def merged(self, other: 'Schedule') -> 'Schedule':
        """Union of two schedules; events may not share a time."""
        return Schedule.from_events(list(self.events) + list(other.events))

    def until(self, t_end: float) -> 'Schedule':
        """Events strictly before ``t_end``."""
        return Schedule(tuple(e for e in self.events if e.time < t_end))

    def segments(self, t_end: float) -> List[Tuple[float, float, Optional[ScheduleEvent]]]:
        """
        Integration intervals [t_i, t_{i+1}] with the event applied at t_i
        (None for the first interval).
        """
        events = self.until(t_end).events
        starts = [0.0] + [e.time for e in events]
        ends = starts[1:] + [float(t_end)]
        applied = [None] + list(events)
        return [(a, b, e) for a, b, e in zip(starts, ends, applied) if b > a or e is None]

    def value_at(self, target: str, t: float, default: Optional[float] = None) -> Optional[float]:
        """Value of ``target`` in force at time t (``default`` before its first event)."""
        value = default
        for event in self.events:
            if event.time > t:
                break
            if event.target == target:
                value = event.value
        return value

    def to_dict(self) -> List[Dict]:
        return [e.to_dict() for e in self.events]
