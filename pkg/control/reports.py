"""
Summary report assembled by run_scenario.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass
class SummaryReport:
    """Every number here comes from an engine operation; sections not computed stay None."""
    scenario: str
    command: str
    structure: Optional[Dict] = None
    equilibria: Optional[Dict] = None
    stability: Optional[Dict] = None
    nonlinear: Optional[Dict] = None
    power: Optional[Dict] = None
    disturbance: Optional[Dict] = None
    tracking: Optional[Dict] = None
    averages: Optional[Dict] = None
    energy: Optional[Dict] = None
    ssa: Optional[Dict] = None
    dsd: Optional[Dict] = None
    sweep: Optional[List[Dict]] = None
    notes: List[str] = field(default_factory=list)
    artifacts: List[Tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        result = {'scenario': self.scenario, 'command': self.command}
        for name in ('structure', 'equilibria', 'stability', 'nonlinear', 'power', 'disturbance',
                     'tracking', 'averages', 'energy', 'ssa', 'dsd', 'sweep'):
            value = getattr(self, name)
            if value is not None:
                result[name] = value
        if self.notes:
            result['notes'] = list(self.notes)
        return result

    def __str__(self) -> str:
        lines = [f"=== {self.command}: {self.scenario} ==="]
        if self.structure:
            s = self.structure
            lines.append(f"Structure: Hurwitz={s['is_hurwitz']} Metzler={s['is_metzler']} "
                         f"controllable={s['is_output_controllable']} g={_fmt(s['static_gain'])}")
        if self.equilibria and self.equilibria.get('positive') is not None:
            lines.append(f"Positive equilibrium: {[round(v, 6) for v in self.equilibria['positive']]}")
        if self.stability:
            s = self.stability
            lines.append(f"alpha_bar = {_fmt(s['alpha_bar'])}  omega* = {_fmt(s['omega_star'])}  "
                         f"weakly SPR = {s['weakly_spr']}")
            if s.get('nonpositive_crossings'):
                lines.append("alpha_bar unbounded: every imaginary-axis crossing needs alpha <= 0")
            lines.append(f"best alpha = {_fmt(s['best_alpha'])}  stable at alpha: {s['stable']}")
        if self.nonlinear:
            lines.append(f"Newton equilibrium: {[round(v, 6) for v in self.nonlinear['state']]} "
                         f"(stable: {self.nonlinear['stable']})")
        if self.power:
            p = self.power
            lines.append(f"Stationary power: {_fmt(p['total'])} (adaptation {_fmt(p['adaptation_cost'])}, "
                         f"constitutive {_fmt(p['constitutive_limit'])})")
        if self.disturbance:
            lines.append(f"Disturbance admissible: {self.disturbance['admissible']} "
                         f"alpha_bar_d = {_fmt(self.disturbance['alpha_bar_d'])}")
        if self.tracking:
            t = self.tracking
            lines.append(f"Tracking: adapted={t['adapted']} final error={_fmt(t['final_error'])} "
                         f"min v={_fmt(t['min_v'])}")
        if self.energy:
            lines.append(f"Mean power: {_fmt(self.energy['mean_power'])}")
        if self.ssa:
            lines.append(f"SSA: {self.ssa['runs']} runs, extinct fraction {self.ssa['extinct_fraction']:.3f}")
        if self.dsd:
            c = self.dsd['comparison']
            lines.append(f"DSD: max deviation {max(c['max_abs_deviation'].values()):.6g} nM, "
                         f"divergence time {_fmt(c['divergence_time'])}")
        if self.sweep:
            lines.append(f"Sweep: {len(self.sweep)} point(s)")
        for note in self.notes:
            lines.append(f"Note: {note}")
        for kind, path in self.artifacts:
            lines.append(f"  [{kind}] {path}")
        return '\n'.join(lines)


def _fmt(value) -> str:
    if value is None:
        return '-'
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
