"""
Inventory of the molecules to supply and gate depletion along a run.
"""
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import pandas as pd

from core_engine.sim.integrator import Trajectory
from .schemas import RECRUIT, RELEASE, SIGNAL, DsdCircuit

DEPLETION_THRESHOLD = 0.1


@dataclass
class GateDepletion:
    """Remaining fraction of each gate/translator over time."""
    fractions: pd.DataFrame
    first_crossing: Dict[str, Optional[float]]
    threshold: float

    @property
    def earliest(self) -> Optional[float]:
        times = [t for t in self.first_crossing.values() if t is not None]
        return min(times) if times else None

    def to_dict(self) -> Dict:
        return {
            'threshold': self.threshold,
            'first_crossing': self.first_crossing,
            'earliest': self.earliest,
            'final_fraction': {name: float(self.fractions[name].iloc[-1]) for name in self.first_crossing},
        }


def gate_depletion(circuit: DsdCircuit, traj: Trajectory,
                   threshold: float = DEPLETION_THRESHOLD) -> GateDepletion:
    frame = pd.DataFrame({'t': traj.times})
    crossing: Dict[str, Optional[float]] = {}
    for gate in circuit.gates:
        available = traj.column(gate.name)
        if gate.loaded:
            available = available + traj.column(gate.loaded)
        fraction = available / gate.initial_concentration
        frame[gate.name] = fraction
        below = np.flatnonzero(fraction < threshold)
        crossing[gate.name] = float(traj.times[below[0]]) if below.size else None
    return GateDepletion(fractions=frame, first_crossing=crossing, threshold=threshold)


def gate_report(circuit: DsdCircuit, traj: Optional[Trajectory] = None,
                threshold: float = DEPLETION_THRESHOLD) -> str:
    """Plain-text inventory; adds a depletion section when a circuit trajectory is given."""
    initial = dict(zip(circuit.species_names, circuit.initial_state()))
    lines = [
        f"DSD circuit: {len(circuit.network.reactions)} reactions, Omega = {circuit.omega:g} nM, "
        f"lambda_fast = {circuit.lambda_fast:g}",
        "",
        "Signal strands:",
    ]
    for strand in circuit.strands:
        if strand.role == SIGNAL:
            lines.append(f"  {strand.name:<12} {initial[strand.name]:>12g} nM   {'-'.join(strand.domains)}")
    for stage, title in ((RECRUIT, "Gates:"), (RELEASE, "Translators:")):
        lines.append("")
        lines.append(title)
        for gate in circuit.gates:
            if gate.stage == stage:
                lines.append(f"  {gate}")
    lines.append("")
    lines.append("Calibrated recruit constants:")
    for label, rate in circuit.calibration.items():
        lines.append(f"  {label:<14} {rate:.6g}")

    if traj is not None:
        depletion = gate_depletion(circuit, traj, threshold)
        lines.append("")
        lines.append(f"Depletion (threshold {threshold:.0%} of Omega):")
        for name, crossed in depletion.first_crossing.items():
            remaining = depletion.fractions[name].iloc[-1]
            when = 'never' if crossed is None else f"t={crossed:g}"
            lines.append(f"  {name:<16} remaining {remaining:7.2%}  below threshold: {when}")
        earliest = depletion.earliest
        lines.append(f"  First gate below threshold: {'none' if earliest is None else f't={earliest:g}'}")
    return '\n'.join(lines) + '\n'
