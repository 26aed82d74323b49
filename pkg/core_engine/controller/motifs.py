"""
Integral controller motifs and their interconnection with a plant network.

The controller species v is appended after the plant species and three reactions
are added:

    reference    v -> 2v        rate alpha*mu   (or h_theta(v) in the Hill variant)
    measurement  v + y -> y     rate alpha
    actuation    v -> v + x_a   rate k

so that the closed loop reads x' = f(x) + e_a k v,  v' = alpha v (mu - y).
"""
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from core_engine.crn.network import build_network, linearize
from core_engine.crn.schemas import LinearForm, Network, RateLaw, Reaction, Species
from core_engine.errors import NetworkValidationError, ParameterError

logger = logging.getLogger(__name__)

CONTROLLER_SPECIES = 'v'
REFERENCE = 'reference'
MEASUREMENT = 'measurement'
ACTUATION = 'actuation'
CONTROLLER_REACTIONS = (REFERENCE, MEASUREMENT, ACTUATION)


@dataclass(frozen=True)
class ControllerParams:
    """Reference mu, stability coefficient alpha, gain k and initial controller level v0."""
    mu: float
    alpha: float
    k: float
    v0: float = 1.0

    def __post_init__(self):
        for name in ('mu', 'alpha', 'k', 'v0'):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0:
                raise ParameterError(f"Controller parameter {name} must be > 0, got {getattr(self, name)}")
            object.__setattr__(self, name, value)

    def with_value(self, name: str, value: float) -> 'ControllerParams':
        if name not in ('mu', 'alpha', 'k', 'v0'):
            raise ParameterError(f"Unknown controller parameter: {name}")
        return replace(self, **{name: value})

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class HillParams:
    """Saturation scale theta of the Hill-repressed reference reaction."""
    theta: float

    def __post_init__(self):
        value = float(self.theta)
        if not np.isfinite(value) or value <= 0:
            raise ParameterError(f"Hill theta must be > 0, got {self.theta}")
        object.__setattr__(self, 'theta', value)

    def rho(self, params: ControllerParams, gamma: float) -> float:
        """rho = k theta / (mu gamma) for the birth-death loop."""
        return params.k * self.theta / (params.mu * gamma)

    def birth_death_equilibrium(self, params: ControllerParams, gamma: float):
        """Closed-form (x*, v*) of the Hill loop around a birth-death plant."""
        rho = self.rho(params, gamma)
        root = -1.0 + np.sqrt(1.0 + 4.0 / rho)
        x_star = params.mu * rho / 2.0 * root
        v_star = rho * params.mu * gamma / (2.0 * params.k) * root
        return float(x_star), float(v_star)


def controller_reactions(plant: Network, params: ControllerParams,
                         hill: Optional[HillParams] = None) -> List[Reaction]:
    y = plant.controlled
    actuated = plant.actuated
    if hill is None:
        reference_law = RateLaw.mass_action()
    else:
        reference_law = RateLaw.hill_repressed(hill.theta, CONTROLLER_SPECIES)
    return [
        Reaction({CONTROLLER_SPECIES: 1}, {CONTROLLER_SPECIES: 2}, params.alpha * params.mu,
                 rate_law=reference_law, label=REFERENCE),
        Reaction({CONTROLLER_SPECIES: 1, y: 1}, {y: 1}, params.alpha, label=MEASUREMENT),
        Reaction({CONTROLLER_SPECIES: 1}, {CONTROLLER_SPECIES: 1, actuated: 1}, params.k, label=ACTUATION),
    ]


@dataclass(frozen=True, eq=False)
class ClosedLoop:
    """
    Plant plus controller, with optional constant input disturbances.

    ``disturbance_inputs`` is the d x m matrix E (plant species by channel) and
    ``disturbance`` the amplitude vector of length m; their product enters the
    plant equations as a constant inflow.
    """
    plant: Network
    params: ControllerParams
    network: Network
    hill: Optional[HillParams] = None
    disturbance_inputs: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    disturbance: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        E = np.asarray(self.disturbance_inputs, dtype=float)
        if E.size == 0:
            E = np.zeros((self.plant.size, 0))
        E = E.reshape(self.plant.size, -1)
        d = np.asarray(self.disturbance, dtype=float).reshape(-1)
        if d.size == 0:
            d = np.zeros(E.shape[1])
        if d.shape[0] != E.shape[1]:
            raise ParameterError(f"Disturbance has {d.shape[0]} values for {E.shape[1]} channels")
        if np.any(E < 0):
            raise ParameterError("Disturbance input matrix E must be nonnegative")
        if np.any(d < 0):
            raise ParameterError(f"Disturbance amplitudes must be >= 0, got {d.tolist()}")
        object.__setattr__(self, 'disturbance_inputs', E)
        object.__setattr__(self, 'disturbance', d)
        inflow = np.zeros(self.network.size)
        inflow[:self.plant.size] = E @ d
        object.__setattr__(self, '_inflow', inflow)

    @property
    def species_names(self) -> List[str]:
        return self.network.species_names

    @property
    def controller_index(self) -> int:
        return self.plant.size

    @property
    def output_index(self) -> int:
        return self.plant.controlled_index

    @property
    def inflow(self) -> np.ndarray:
        return self._inflow

    def initial_state(self) -> np.ndarray:
        return self.network.initial_state()

    def rhs(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.network.derivative(x) + self._inflow

    def jacobian(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.network.jacobian_matrix(x)

    def linear_form(self) -> LinearForm:
        """Linear form of the plant (exact for unimolecular plants) carrying E."""
        return linearize(self.plant, self.plant.initial_state(), E=self.disturbance_inputs)

    def with_parameter(self, target: str, value: float) -> 'ClosedLoop':
        """
        Return a copy with one parameter changed.

        Targets: ``controller.<mu|alpha|k|v0>``, ``hill.theta``, ``rate.<label>``,
        ``disturbance.d.<index>``.
        """
        parts = target.split('.')
        if parts[0] == 'controller' and len(parts) == 2:
            return _assemble(self.plant, self.params.with_value(parts[1], value), self.hill,
                             self.disturbance_inputs, self.disturbance)
        if parts[0] == 'hill' and parts[1:] == ['theta']:
            return _assemble(self.plant, self.params, HillParams(value),
                             self.disturbance_inputs, self.disturbance)
        if parts[0] == 'rate' and len(parts) == 2:
            if parts[1] in CONTROLLER_REACTIONS:
                raise ParameterError(f"Controller rates are set through controller.*, not {target}")
            if not float(value) > 0:
                raise ParameterError(f"{target} must be > 0, got {value}")
            return _assemble(self.plant.with_rate(parts[1], value), self.params, self.hill,
                             self.disturbance_inputs, self.disturbance)
        if parts[0] == 'disturbance' and parts[-1].isdigit() and parts[1:-1] in ([], ['d']):
            index = int(parts[-1])
            if index >= self.disturbance.shape[0]:
                raise ParameterError(f"{target}: only {self.disturbance.shape[0]} disturbance channel(s)")
            d = self.disturbance.copy()
            d[index] = value
            return _assemble(self.plant, self.params, self.hill, self.disturbance_inputs, d)
        raise ParameterError(f"Unknown parameter path: {target}")

    def with_disturbance(self, E: np.ndarray, d) -> 'ClosedLoop':
        return _assemble(self.plant, self.params, self.hill, E, d)

    def with_initial_state(self, state) -> 'ClosedLoop':
        """Copy whose species start at ``state`` (controller entry included)."""
        state = np.asarray(state, dtype=float)
        values = dict(zip(self.plant.species_names, state[:self.plant.size]))
        plant = self.plant.with_initial(values)
        v0 = float(state[self.controller_index])
        if v0 <= 0:
            # v = 0 is an invariant set; keep it out of ControllerParams, which requires v0 > 0
            loop = _assemble(plant, self.params, self.hill, self.disturbance_inputs, self.disturbance)
            network = loop.network.with_initial({CONTROLLER_SPECIES: 0.0})
            return replace(loop, network=network)
        return _assemble(plant, self.params.with_value('v0', v0), self.hill,
                         self.disturbance_inputs, self.disturbance)


def _assemble(plant: Network, params: ControllerParams, hill: Optional[HillParams],
              E: Optional[np.ndarray] = None, d=None) -> ClosedLoop:
    if CONTROLLER_SPECIES in plant.species_names:
        raise NetworkValidationError(f"Plant already declares a species named {CONTROLLER_SPECIES!r}")
    clash = set(CONTROLLER_REACTIONS) & set(plant.reaction_labels)
    if clash:
        raise NetworkValidationError(f"Plant reaction labels clash with controller reactions: {sorted(clash)}")
    species = list(plant.species) + [Species(CONTROLLER_SPECIES, params.v0)]
    reactions = list(plant.reactions) + controller_reactions(plant, params, hill)
    network = build_network(species, reactions, controlled=plant.controlled, actuated=plant.actuated)
    return ClosedLoop(
        plant=plant,
        params=params,
        network=network,
        hill=hill,
        disturbance_inputs=np.zeros((plant.size, 0)) if E is None else E,
        disturbance=np.zeros(0) if d is None else d,
    )


def attach_integral_controller(plant: Network, params: ControllerParams) -> ClosedLoop:
    """Append v and the reference, measurement and actuation reactions to ``plant``."""
    return _assemble(plant, params, None)


def attach_hill_controller(plant: Network, params: ControllerParams, hill: HillParams) -> ClosedLoop:
    """Same as the ideal motif with the reference rate replaced by h_theta(v) = alpha theta mu / (theta + v)."""
    if not isinstance(hill, HillParams):
        hill = HillParams(hill)
    return _assemble(plant, params, hill)


def disturbance_matrix(plant: Network, columns: List[Dict[str, float]]) -> np.ndarray:
    """Build E from per-channel ``{species: weight}`` maps."""
    E = np.zeros((plant.size, len(columns)))
    for j, column in enumerate(columns):
        for name, weight in column.items():
            if weight < 0:
                raise ParameterError(f"Disturbance weight for {name} must be >= 0, got {weight}")
            E[plant.index_of(name), j] = weight
    return E
