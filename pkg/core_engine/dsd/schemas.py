"""
Data structures for compiled DNA strand-displacement circuits.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from core_engine.controller.motifs import CONTROLLER_SPECIES, ClosedLoop, ControllerParams
from core_engine.crn.schemas import Network
from core_engine.errors import CompilationError

SIGNAL = 'signal'
MESSENGER = 'messenger'
WASTE = 'waste'
STRAND_ROLES = (SIGNAL, MESSENGER, WASTE)

RECRUIT = 'recruit'
RELEASE = 'release'
GATE_STAGES = (RECRUIT, RELEASE)


@dataclass(frozen=True)
class Strand:
    """Single strand with abstract domain labels (toeholds are t/T, specificity d)."""
    name: str
    role: str
    domains: Tuple[str, ...]

    def __post_init__(self):
        if self.role not in STRAND_ROLES:
            raise CompilationError(f"Unknown strand role {self.role!r} for {self.name}")
        object.__setattr__(self, 'domains', tuple(self.domains))
        if self.role == SIGNAL and len(self.domains) != 3:
            raise CompilationError(f"Signal strand {self.name} needs 3 domains, got {len(self.domains)}")

    def __str__(self) -> str:
        return f"{self.name} [{self.role}] {'-'.join(self.domains)}"


@dataclass(frozen=True)
class Gate:
    """
    Multi-stranded complex supplied at concentration Omega.

    Recruit gates bind the reactant strands of a formal reaction and release its
    messenger; release complexes (translators) turn the messenger into products.
    ``loaded`` names the gate-reactant complex of a bimolecular recruit, which still
    counts as available gate.
    """
    name: str
    consumed_by: str
    initial_concentration: float
    stage: str
    binds: Tuple[str, ...] = ()
    releases: Tuple[str, ...] = ()
    domains: Tuple[str, ...] = ()
    loaded: Optional[str] = None

    def __post_init__(self):
        if self.stage not in GATE_STAGES:
            raise CompilationError(f"Unknown gate stage {self.stage!r} for {self.name}")
        if not self.initial_concentration > 0:
            raise CompilationError(f"Gate {self.name} needs a positive concentration, got {self.initial_concentration}")
        object.__setattr__(self, 'binds', tuple(self.binds))
        object.__setattr__(self, 'releases', tuple(self.releases))
        object.__setattr__(self, 'domains', tuple(self.domains))

    def __str__(self) -> str:
        binds = ' + '.join(self.binds) or '(none)'
        releases = ' + '.join(self.releases) or '(none)'
        loaded = f", loaded as {self.loaded}" if self.loaded else ''
        return (f"{self.name} [{self.stage} for {self.consumed_by}] {self.initial_concentration:g} nM, "
                f"binds {binds}{loaded}, releases {releases}, domains {'-'.join(self.domains)}")


@dataclass(frozen=True, eq=False)
class DsdCircuit:
    """
    Expanded network realizing a formal network, with its strands and gates.

    ``calibration`` maps each formal label to the recruit-step constant and
    ``reaction_map`` maps it to the (recruit, release) expanded labels;
    ``binding_map`` holds the (bind, unbind) labels of bimolecular reactions.
    """
    formal: Union[ClosedLoop, Network]
    network: Network
    strands: List[Strand]
    gates: List[Gate]
    omega: float
    lambda_fast: float
    calibration: Dict[str, float]
    reaction_map: Dict[str, Tuple[str, str]] = field(default_factory=dict)
    binding_map: Dict[str, Tuple[str, str]] = field(default_factory=dict)

    @property
    def formal_network(self) -> Network:
        return self.formal.network if isinstance(self.formal, ClosedLoop) else self.formal

    @property
    def params(self) -> ControllerParams:
        if not isinstance(self.formal, ClosedLoop):
            raise CompilationError("Circuit was compiled from a bare network; no controller parameters")
        return self.formal.params

    @property
    def species_names(self) -> List[str]:
        return self.network.species_names

    @property
    def signal_species(self) -> List[str]:
        return self.formal_network.species_names

    @property
    def output_index(self) -> int:
        return self.network.controlled_index

    @property
    def controller_index(self) -> Optional[int]:
        if CONTROLLER_SPECIES in self.network.species_names:
            return self.network.index_of(CONTROLLER_SPECIES)
        return None

    @property
    def gate_names(self) -> List[str]:
        return [g.name for g in self.gates]

    def initial_state(self) -> np.ndarray:
        return self.network.initial_state()

    def rhs(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.network.derivative(x)

    def jacobian(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.network.jacobian_matrix(x)

    def with_parameter(self, target: str, value: float) -> 'DsdCircuit':
        """Change a formal parameter and recalibrate the affected rate constants."""
        from .compiler import compile_to_dsd

        if not isinstance(self.formal, ClosedLoop):
            raise CompilationError("Parameter changes need a circuit compiled from a closed loop")
        return compile_to_dsd(self.formal.with_parameter(target, value), self.omega, self.lambda_fast)

    def to_dict(self) -> Dict:
        return {
            'omega': self.omega,
            'lambda_fast': self.lambda_fast,
            'calibration': self.calibration,
            'reaction_map': {k: list(v) for k, v in self.reaction_map.items()},
            'binding_map': {k: list(v) for k, v in self.binding_map.items()},
            'strands': [{'name': s.name, 'role': s.role, 'domains': list(s.domains)} for s in self.strands],
            'gates': [
                {'name': g.name, 'consumed_by': g.consumed_by, 'stage': g.stage,
                 'initial_concentration': g.initial_concentration,
                 'binds': list(g.binds), 'releases': list(g.releases), 'domains': list(g.domains),
                 'loaded': g.loaded}
                for g in self.gates
            ],
            'network': self.network.to_dict(),
        }
