"""
Stochastic simulation (Gillespie direct method) of closed loops in molecule counts.

Concentrations are converted to counts with ``volume_scale`` (molecules per unit
concentration). A reaction of order o with rate constant q has propensity
q * scale^(1 - o) * prod_i n_i (n_i - 1) ... (n_i - c_i + 1); the Hill factor
becomes theta*scale / (theta*scale + n_v).
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from core_engine.controller.motifs import ClosedLoop
from core_engine.errors import ParameterError, SsaError
from .integrator import Trajectory

logger = logging.getLogger(__name__)

MAX_COUNT = 2 ** 53
DEFAULT_MAX_EVENTS = 10_000_000
DRAW_BATCH = 4096

Seed = Union[int, np.random.SeedSequence]


@dataclass
class Channel:
    rate: float
    reactants: List[Tuple[int, int]]
    changes: List[Tuple[int, int]]
    hill: Optional[Tuple[int, float]] = None

    def propensity(self, counts: List[int]) -> float:
        value = self.rate
        for idx, order in self.reactants:
            n = counts[idx]
            for j in range(order):
                value *= n - j
            if value <= 0:
                return 0.0
        if self.hill is not None:
            rep, theta = self.hill
            value *= theta / (theta + counts[rep])
        return value


def build_channels(closed_loop: ClosedLoop, volume_scale: float) -> List[Channel]:
    """Reaction channels in counts, plus one zeroth-order channel per disturbance inflow."""
    network = closed_loop.network
    hill = {k: (rep, theta * volume_scale) for k, rep, theta in network.hill_channels}
    stoich = network.stoichiometry
    channels = []
    for k, reaction in enumerate(network.reactions):
        changes = [(i, int(stoich[i, k])) for i in range(network.size) if stoich[i, k] != 0]
        channels.append(Channel(
            rate=reaction.rate_constant * volume_scale ** (1 - reaction.order),
            reactants=network.reactant_terms[k],
            changes=changes,
            hill=hill.get(k),
        ))
    for i, inflow in enumerate(closed_loop.inflow):
        if inflow > 0:
            channels.append(Channel(rate=inflow * volume_scale, reactants=[], changes=[(i, 1)]))
    return channels


def initial_counts(closed_loop: ClosedLoop, volume_scale: float) -> List[int]:
    scaled = closed_loop.initial_state() * volume_scale
    rounded = np.rint(scaled)
    if np.any(np.abs(scaled - rounded) > 1e-9 * np.maximum(1.0, np.abs(scaled))):
        raise SsaError(f"Initial state times volume_scale is not integral: {scaled.tolist()}")
    if np.any(rounded > MAX_COUNT):
        raise SsaError("Initial counts exceed the representable range")
    return [int(n) for n in rounded]


@dataclass
class SsaResult:
    """Event-resolved stochastic trajectory in counts."""
    times: np.ndarray
    counts: np.ndarray
    species_names: List[str]
    volume_scale: float
    t_end: float
    extinct: bool
    extinction_time: Optional[float]
    events: int
    output_index: int
    controller_index: int

    def sample(self, grid) -> np.ndarray:
        """Counts on ``grid`` (piecewise constant between events)."""
        grid = np.asarray(grid, dtype=float)
        index = np.searchsorted(self.times, grid, side='right') - 1
        return self.counts[np.clip(index, 0, len(self.times) - 1)]

    def concentrations(self, grid) -> np.ndarray:
        return self.sample(grid) / self.volume_scale

    def to_trajectory(self, samples: int = 1000) -> Trajectory:
        grid = np.linspace(0.0, self.t_end, samples)
        return Trajectory.from_samples(grid, self.concentrations(grid), self.species_names,
                                       output_index=self.output_index,
                                       controller_index=self.controller_index)

    def to_dataframe(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.counts, columns=self.species_names)
        frame.insert(0, 't', self.times)
        return frame

    def to_dict(self) -> Dict:
        return {
            'events': self.events,
            'extinct': self.extinct,
            'extinction_time': self.extinction_time,
            'final_counts': self.counts[-1].tolist(),
        }


def ssa_simulate(closed_loop: ClosedLoop, volume_scale: float, t_end: float, seed: Seed = 0,
                 max_events: int = DEFAULT_MAX_EVENTS) -> SsaResult:
    """
    One Gillespie run from the closed loop's initial state.

    The same seed reproduces the same event sequence. The extinction flag is
    raised the first time the controller count reaches 0 (including at t = 0);
    v = 0 is absorbing.

    Raises:
        ParameterError: Non-positive volume scale or horizon
        SsaError: Non-integral initial counts, count overflow, event budget exhausted
    """
    if not volume_scale > 0:
        raise ParameterError(f"volume_scale must be > 0, got {volume_scale}")
    if not t_end > 0:
        raise ParameterError(f"t_end must be > 0, got {t_end}")
    rng = np.random.default_rng(seed)
    channels = build_channels(closed_loop, volume_scale)
    counts = initial_counts(closed_loop, volume_scale)
    v_index = closed_loop.controller_index

    times = [0.0]
    history = [tuple(counts)]
    extinction_time = 0.0 if counts[v_index] == 0 else None
    t = 0.0
    events = 0
    exponentials = rng.standard_exponential(DRAW_BATCH)
    uniforms = rng.random(DRAW_BATCH)
    cursor = 0

    while True:
        propensities = [c.propensity(counts) for c in channels]
        total = sum(propensities)
        if total <= 0.0:
            break
        if cursor == DRAW_BATCH:
            exponentials = rng.standard_exponential(DRAW_BATCH)
            uniforms = rng.random(DRAW_BATCH)
            cursor = 0
        t += exponentials[cursor] / total
        if t > t_end:
            break
        threshold = uniforms[cursor] * total
        cursor += 1
        chosen = len(channels) - 1
        running = 0.0
        for index, a in enumerate(propensities):
            running += a
            if threshold < running:
                chosen = index
                break
        for idx, delta in channels[chosen].changes:
            counts[idx] += delta
            if counts[idx] > MAX_COUNT:
                raise SsaError(f"Count of {closed_loop.species_names[idx]} overflowed at t={t:g}")
        events += 1
        if events > max_events:
            raise SsaError(f"SSA exceeded {max_events} events before t={t_end:g}")
        times.append(t)
        history.append(tuple(counts))
        if extinction_time is None and counts[v_index] == 0:
            extinction_time = t
            logger.debug(f"[SSA] Controller went extinct at t={t:g}")

    return SsaResult(
        times=np.array(times),
        counts=np.array(history, dtype=np.int64),
        species_names=list(closed_loop.species_names),
        volume_scale=float(volume_scale),
        t_end=float(t_end),
        extinct=extinction_time is not None,
        extinction_time=extinction_time,
        events=events,
        output_index=closed_loop.output_index,
        controller_index=v_index,
    )


@dataclass
class SsaEnsemble:
    """Seeded batch of SSA runs summarized on a common grid."""
    grid: np.ndarray
    mean: np.ndarray
    runs: List[SsaResult]
    species_names: List[str]

    @property
    def extinct_fraction(self) -> float:
        return float(np.mean([r.extinct for r in self.runs]))

    def mean_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.mean, columns=self.species_names)
        frame.insert(0, 't', self.grid)
        return frame

    def to_dict(self) -> Dict:
        return {
            'runs': len(self.runs),
            'extinct_fraction': self.extinct_fraction,
            'mean_final_state': self.mean[-1].tolist(),
            'events': int(sum(r.events for r in self.runs)),
        }


def ssa_ensemble(closed_loop: ClosedLoop, volume_scale: float, t_end: float, runs: int,
                 seed: int = 0, samples: int = 200,
                 max_events: int = DEFAULT_MAX_EVENTS) -> SsaEnsemble:
    """Run ``runs`` independent simulations with child seeds spawned from ``seed``."""
    if runs < 1:
        raise ParameterError(f"runs must be >= 1, got {runs}")
    children = np.random.SeedSequence(seed).spawn(runs)
    results = [ssa_simulate(closed_loop, volume_scale, t_end, child, max_events) for child in children]
    grid = np.linspace(0.0, t_end, samples)
    mean = np.mean([r.concentrations(grid) for r in results], axis=0)
    ensemble = SsaEnsemble(grid=grid, mean=mean, runs=results, species_names=list(closed_loop.species_names))
    logger.info(f"[SSA] {runs} runs, extinct fraction {ensemble.extinct_fraction:.3f}")
    return ensemble
