"""
Data structures for mass-action reaction networks.
"""
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from core_engine.errors import NetworkValidationError, ParameterError, StructureError

MASS_ACTION = 'mass_action'
HILL_REPRESSED = 'hill_repressed'


@dataclass(frozen=True)
class Species:
    """A molecular species with its initial concentration (nM by convention)."""
    name: str
    initial_concentration: float = 0.0

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.strip():
            raise NetworkValidationError(f"Species name must be a non-empty string, got {self.name!r}")
        value = float(self.initial_concentration)
        if not np.isfinite(value) or value < 0:
            raise NetworkValidationError(
                f"Species {self.name}: initial_concentration must be >= 0, got {self.initial_concentration}"
            )
        object.__setattr__(self, 'initial_concentration', value)


@dataclass(frozen=True)
class RateLaw:
    """
    Rate law of a reaction.

    ``mass_action`` uses the product of reactant concentrations. ``hill_repressed``
    multiplies the mass-action term by theta / (theta + [repressor]), which turns
    the reference reaction V -> 2V into h_theta(v) * v.
    """
    kind: str = MASS_ACTION
    theta: Optional[float] = None
    repressor: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (MASS_ACTION, HILL_REPRESSED):
            raise NetworkValidationError(f"Unknown rate law: {self.kind}")
        if self.kind == HILL_REPRESSED:
            if self.theta is None or not float(self.theta) > 0:
                raise ParameterError(f"Hill rate law requires theta > 0, got {self.theta}")
            if not self.repressor:
                raise NetworkValidationError("Hill rate law requires a repressor species")
            object.__setattr__(self, 'theta', float(self.theta))

    @classmethod
    def mass_action(cls) -> 'RateLaw':
        return cls()

    @classmethod
    def hill_repressed(cls, theta: float, repressor: str) -> 'RateLaw':
        return cls(kind=HILL_REPRESSED, theta=theta, repressor=repressor)

    @property
    def is_mass_action(self) -> bool:
        return self.kind == MASS_ACTION

    def to_dict(self) -> Dict:
        if self.is_mass_action:
            return {'kind': MASS_ACTION}
        return {'kind': self.kind, 'theta': self.theta, 'repressor': self.repressor}


@dataclass(frozen=True)
class Reaction:
    """
    A reaction channel: reactants -> products at ``rate_constant``.

    Units follow the reaction order (s^-1 first order, conc^-1 s^-1 second order,
    conc s^-1 zeroth order); no unit algebra is performed.
    """
    reactants: Dict[str, int] = field(default_factory=dict)
    products: Dict[str, int] = field(default_factory=dict)
    rate_constant: float = 1.0
    rate_law: RateLaw = field(default_factory=RateLaw)
    label: str = ''

    def __post_init__(self):
        rate = float(self.rate_constant)
        if not np.isfinite(rate) or rate <= 0:
            raise NetworkValidationError(
                f"Reaction {self.label or self.describe()}: rate_constant must be > 0, got {self.rate_constant}"
            )
        object.__setattr__(self, 'rate_constant', rate)
        object.__setattr__(self, 'reactants', self._clean_side(self.reactants, 'reactants'))
        object.__setattr__(self, 'products', self._clean_side(self.products, 'products'))

    def _clean_side(self, side: Dict[str, int], which: str) -> Dict[str, int]:
        cleaned = {}
        for name, count in dict(side or {}).items():
            if int(count) != count or count < 0:
                raise NetworkValidationError(
                    f"Reaction {self.label}: stoichiometric count for {name} in {which} must be a "
                    f"nonnegative integer, got {count}"
                )
            if count:
                cleaned[str(name)] = int(count)
        return cleaned

    @property
    def order(self) -> int:
        return sum(self.reactants.values())

    @property
    def participants(self) -> List[str]:
        names = list(self.reactants) + [p for p in self.products if p not in self.reactants]
        if not self.rate_law.is_mass_action and self.rate_law.repressor not in names:
            names.append(self.rate_law.repressor)
        return names

    def describe(self) -> str:
        def side(counts: Dict[str, int]) -> str:
            terms = [name if n == 1 else f"{n}{name}" for name, n in counts.items()]
            return ' + '.join(terms) if terms else '0'
        return f"{side(self.reactants)} -> {side(self.products)}"

    def with_rate(self, rate_constant: float) -> 'Reaction':
        return replace(self, rate_constant=rate_constant)

    def to_dict(self) -> Dict:
        return {
            'label': self.label,
            'reactants': dict(self.reactants),
            'products': dict(self.products),
            'rate': self.rate_constant,
            'rate_law': self.rate_law.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class Network:
    """
    Species, reactions and the output/actuation indices of a controlled plant.

    Species order is declaration order and fixes vector indexing everywhere.
    Build instances with :func:`core_engine.crn.network.build_network`.
    """
    species: Tuple[Species, ...]
    reactions: Tuple[Reaction, ...]
    controlled_index: int
    actuated_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'species', tuple(self.species))
        object.__setattr__(self, 'reactions', tuple(self.reactions))
        names = [s.name for s in self.species]
        if not names:
            raise NetworkValidationError("Network must declare at least one species")
        seen = set()
        for name in names:
            if name in seen:
                raise NetworkValidationError(f"Duplicate species name: {name}")
            seen.add(name)
        labels = set()
        for reaction in self.reactions:
            for name in reaction.participants:
                if name not in seen:
                    raise NetworkValidationError(
                        f"Reaction {reaction.label or reaction.describe()} references undeclared species {name!r}"
                    )
            if reaction.label in labels:
                raise NetworkValidationError(f"Duplicate reaction label: {reaction.label}")
            labels.add(reaction.label)
        for attr in ('controlled_index', 'actuated_index'):
            index = getattr(self, attr)
            if not isinstance(index, (int, np.integer)) or not 0 <= index < len(names):
                raise NetworkValidationError(f"{attr} {index} out of range for {len(names)} species")

    @property
    def size(self) -> int:
        return len(self.species)

    @property
    def species_names(self) -> List[str]:
        return [s.name for s in self.species]

    @property
    def reaction_labels(self) -> List[str]:
        return [r.label for r in self.reactions]

    @property
    def controlled(self) -> str:
        return self.species[self.controlled_index].name

    @property
    def actuated(self) -> str:
        return self.species[self.actuated_index].name

    @property
    def is_unimolecular(self) -> bool:
        """True when every reaction is mass-action of order at most one."""
        return all(r.order <= 1 and r.rate_law.is_mass_action for r in self.reactions)

    def index_of(self, name: str) -> int:
        try:
            return self.species_names.index(name)
        except ValueError:
            raise NetworkValidationError(f"Unknown species: {name}")

    def reaction(self, label: str) -> Reaction:
        for reaction in self.reactions:
            if reaction.label == label:
                return reaction
        raise ParameterError(f"Unknown reaction label: {label}")

    def initial_state(self) -> np.ndarray:
        return np.array([s.initial_concentration for s in self.species], dtype=float)

    def with_rates(self, rates: Dict[str, float]) -> 'Network':
        """Return a copy with the rate constants of the labelled reactions replaced."""
        for label in rates:
            self.reaction(label)
        reactions = tuple(
            r.with_rate(rates[r.label]) if r.label in rates else r for r in self.reactions
        )
        return replace(self, reactions=reactions)

    def with_rate(self, label: str, rate_constant: float) -> 'Network':
        return self.with_rates({label: rate_constant})

    def with_initial(self, values: Dict[str, float]) -> 'Network':
        for name in values:
            self.index_of(name)
        species = tuple(
            Species(s.name, values[s.name]) if s.name in values else s for s in self.species
        )
        return replace(self, species=species)

    # Compiled arrays for fast evaluation.

    @cached_property
    def reactant_matrix(self) -> np.ndarray:
        """K x d matrix of reactant stoichiometric counts."""
        matrix = np.zeros((len(self.reactions), self.size))
        for k, reaction in enumerate(self.reactions):
            for name, count in reaction.reactants.items():
                matrix[k, self.index_of(name)] = count
        return matrix

    @cached_property
    def stoichiometry(self) -> np.ndarray:
        """d x K matrix of net stoichiometric vectors (columns)."""
        matrix = np.zeros((self.size, len(self.reactions)))
        for k, reaction in enumerate(self.reactions):
            for name, count in reaction.products.items():
                matrix[self.index_of(name), k] += count
            for name, count in reaction.reactants.items():
                matrix[self.index_of(name), k] -= count
        return matrix

    @cached_property
    def rate_vector(self) -> np.ndarray:
        return np.array([r.rate_constant for r in self.reactions], dtype=float)

    @cached_property
    def hill_channels(self) -> List[Tuple[int, int, float]]:
        """(reaction index, repressor index, theta) for Hill-repressed reactions."""
        return [
            (k, self.index_of(r.rate_law.repressor), r.rate_law.theta)
            for k, r in enumerate(self.reactions)
            if not r.rate_law.is_mass_action
        ]

    @cached_property
    def reactant_terms(self) -> List[List[Tuple[int, int]]]:
        return [
            [(self.index_of(name), count) for name, count in r.reactants.items()]
            for r in self.reactions
        ]

    def propensities(self, x: np.ndarray) -> np.ndarray:
        """Reaction rates lambda_k(x); no sign checks on ``x``."""
        if not self.reactions:
            return np.zeros(0)
        rates = self.rate_vector * np.prod(np.power(x[None, :], self.reactant_matrix), axis=1)
        for k, rep, theta in self.hill_channels:
            rates[k] *= theta / (theta + x[rep])
        return rates

    def derivative(self, x: np.ndarray) -> np.ndarray:
        """Sum_k lambda_k(x) zeta_k; no sign checks on ``x``."""
        if not self.reactions:
            return np.zeros(self.size)
        return self.stoichiometry @ self.propensities(x)

    def jacobian_matrix(self, x: np.ndarray) -> np.ndarray:
        """Analytic Jacobian of :meth:`derivative`."""
        n_reactions = len(self.reactions)
        if not n_reactions:
            return np.zeros((self.size, self.size))
        grad = np.zeros((n_reactions, self.size))
        hill = {k: (rep, theta) for k, rep, theta in self.hill_channels}
        for k, terms in enumerate(self.reactant_terms):
            rate = self.rate_vector[k]
            for j, (idx, power) in enumerate(terms):
                partial = rate * power * x[idx] ** (power - 1)
                for other, (idx2, power2) in enumerate(terms):
                    if other != j:
                        partial *= x[idx2] ** power2
                grad[k, idx] += partial
            if k in hill:
                rep, theta = hill[k]
                mass = rate
                for idx, power in terms:
                    mass *= x[idx] ** power
                factor = theta / (theta + x[rep])
                grad[k, :] *= factor
                grad[k, rep] += mass * (-theta / (theta + x[rep]) ** 2)
        return self.stoichiometry @ grad

    def to_dict(self) -> Dict:
        return {
            'species': [{'name': s.name, 'initial': s.initial_concentration} for s in self.species],
            'reactions': [r.to_dict() for r in self.reactions],
            'controlled': self.controlled,
            'actuated': self.actuated,
        }


@dataclass(frozen=True, eq=False)
class LinearForm:
    """
    Linear description f(x) = A x + b with actuation B, output C and disturbance inputs E.

    ``exact`` is True when the form came from a unimolecular network, where it is
    point-independent. The sign of ``b`` is not constrained for linearizations of
    nonlinear networks.
    """
    A: np.ndarray
    b: np.ndarray
    B: np.ndarray
    C: np.ndarray
    E: Optional[np.ndarray] = None
    exact: bool = True

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        d = A.shape[0]
        if A.shape != (d, d):
            raise NetworkValidationError(f"A must be square, got shape {A.shape}")
        b = np.asarray(self.b, dtype=float).reshape(d)
        B = np.asarray(self.B, dtype=float).reshape(d)
        C = np.asarray(self.C, dtype=float).reshape(d)
        E = np.zeros((d, 0)) if self.E is None else np.asarray(self.E, dtype=float).reshape(d, -1)
        for name, value in (('B', B), ('C', C), ('E', E)):
            if np.any(value < 0):
                raise NetworkValidationError(f"{name} must be entrywise nonnegative")
        for name, value in (('A', A), ('b', b), ('B', B), ('C', C), ('E', E)):
            object.__setattr__(self, name, value)

    @property
    def size(self) -> int:
        return self.A.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """A^-1 rhs via a linear solve; raises StructureError on near-singular A."""
        condition = np.linalg.cond(self.A)
        if not np.isfinite(condition) or condition > 1e12:
            raise StructureError(f"A is singular or ill-conditioned (condition estimate {condition:.3g})")
        return np.linalg.solve(self.A, rhs)

    @cached_property
    def static_gain(self) -> float:
        """g = -C A^-1 B."""
        return float(-self.C @ self.solve(self.B))

    def output_offset(self, w: np.ndarray) -> float:
        """C A^-1 w for a constant input vector w."""
        return float(self.C @ self.solve(np.asarray(w, dtype=float)))

    def effective_reference(self, mu: float, d: Optional[np.ndarray] = None) -> float:
        """mu + C A^-1 (b + E d): the reference seen by the controller under constant inputs."""
        w = self.b.copy()
        if d is not None and self.E.shape[1]:
            w = w + self.E @ np.asarray(d, dtype=float)
        return mu + self.output_offset(w)

    def with_disturbance(self, E: np.ndarray) -> 'LinearForm':
        return replace(self, E=np.asarray(E, dtype=float))


@dataclass(frozen=True)
class StructureReport:
    """Flags for the structural assumptions of the integral controller."""
    is_unimolecular: bool
    is_metzler: bool
    is_hurwitz: bool
    spectral_abscissa: float
    is_output_controllable: bool
    static_gain: Optional[float]
    eigenvalues_of_A: Tuple[complex, ...]
    diagnostic: str = ''
    jacobian_fd_error: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            'is_unimolecular': self.is_unimolecular,
            'is_metzler': self.is_metzler,
            'is_hurwitz': self.is_hurwitz,
            'spectral_abscissa': self.spectral_abscissa,
            'is_output_controllable': self.is_output_controllable,
            'static_gain': self.static_gain,
            'eigenvalues_of_A': list(self.eigenvalues_of_A),
            'diagnostic': self.diagnostic,
            'jacobian_fd_error': self.jacobian_fd_error,
        }


