"""
Construction, evaluation and structural analysis of mass-action networks.
"""
import logging
from dataclasses import replace
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from core_engine.errors import NetworkValidationError, StructureError
from .schemas import LinearForm, Network, Reaction, Species, StructureReport

logger = logging.getLogger(__name__)

HURWITZ_MARGIN = 1e-9

SpeciesSpec = Union[Species, str, Dict]


def _as_species(spec: SpeciesSpec) -> Species:
    if isinstance(spec, Species):
        return spec
    if isinstance(spec, str):
        return Species(spec)
    if isinstance(spec, dict):
        return Species(spec['name'], spec.get('initial', spec.get('initial_concentration', 0.0)))
    raise NetworkValidationError(f"Cannot interpret species declaration {spec!r}")


def build_network(
    species: Sequence[SpeciesSpec],
    reactions: Iterable[Reaction],
    controlled: Optional[str] = None,
    actuated: Optional[str] = None,
) -> Network:
    """
    Validate declarations and return a Network with resolved indices.

    Args:
        species: Species objects, names, or ``{"name", "initial"}`` dicts
        reactions: Reaction objects; unlabelled reactions get ``r<index>``
        controlled: Name of the measured species (default: last species)
        actuated: Name of the actuated species (default: first species)

    Returns:
        Validated Network

    Raises:
        NetworkValidationError: Duplicate species, unknown participant, bad rate
    """
    declared = [_as_species(s) for s in species]
    names = [s.name for s in declared]
    if len(set(names)) != len(names):
        duplicates = sorted({n for n in names if names.count(n) > 1})
        raise NetworkValidationError(f"Duplicate species name(s): {', '.join(duplicates)}")

    labelled = []
    for k, reaction in enumerate(reactions):
        if not isinstance(reaction, Reaction):
            raise NetworkValidationError(f"Reaction {k} is not a Reaction instance")
        labelled.append(reaction if reaction.label else replace(reaction, label=f"r{k}"))

    def resolve(name: Optional[str], default: int, role: str) -> int:
        if name is None:
            return default
        if name not in names:
            raise NetworkValidationError(f"{role} species {name!r} is not declared")
        return names.index(name)

    return Network(
        species=tuple(declared),
        reactions=tuple(labelled),
        controlled_index=resolve(controlled, len(names) - 1, 'Controlled'),
        actuated_index=resolve(actuated, 0, 'Actuated'),
    )


def _as_state(network: Network, state) -> np.ndarray:
    x = np.asarray(state, dtype=float).reshape(-1)
    if x.shape[0] != network.size:
        raise NetworkValidationError(f"State has {x.shape[0]} entries, network has {network.size} species")
    return x


def evaluate_rhs(network: Network, state) -> np.ndarray:
    """
    Reaction rate equations sum_k lambda_k(x) zeta_k.

    Raises:
        NetworkValidationError: Negative or wrongly sized state
    """
    x = _as_state(network, state)
    if np.any(x < 0):
        raise NetworkValidationError(f"State must be nonnegative, got min {x.min():.3g}")
    return network.derivative(x)


def jacobian(network: Network, state) -> np.ndarray:
    """Analytic Jacobian of the reaction rate equations."""
    return network.jacobian_matrix(_as_state(network, state))


def finite_difference_jacobian(network: Network, state, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian, used to cross-check the analytic one."""
    x = _as_state(network, state)
    result = np.zeros((network.size, network.size))
    for j in range(network.size):
        h = step * max(1.0, abs(x[j]))
        up, down = x.copy(), x.copy()
        up[j] += h
        down[j] -= h
        result[:, j] = (network.derivative(up) - network.derivative(down)) / (2 * h)
    return result


def linearize(network: Network, point, E: Optional[np.ndarray] = None) -> LinearForm:
    """
    Linear form A = df/dx(point), b = f(point) - A point.

    For unimolecular networks the result does not depend on ``point``.
    """
    x = _as_state(network, point)
    if np.any(x < 0):
        raise NetworkValidationError("Linearization point must be nonnegative")
    A = network.jacobian_matrix(x)
    b = network.derivative(x) - A @ x
    B = np.zeros(network.size)
    B[network.actuated_index] = 1.0
    C = np.zeros(network.size)
    C[network.controlled_index] = 1.0
    return LinearForm(A=A, b=b, B=B, C=C, E=E, exact=network.is_unimolecular)


def spectral_abscissa(matrix: np.ndarray) -> float:
    """Maximum real part of the spectrum."""
    return float(np.max(np.linalg.eigvals(matrix).real))


def structural_checks(
    linear: LinearForm,
    network: Optional[Network] = None,
    point=None,
    test_mode: bool = False,
) -> StructureReport:
    """
    Check the assumptions the controller relies on.

    Args:
        linear: Linear form to inspect
        network: Source network, needed for the finite-difference cross-check
        point: Linearization point for the cross-check (defaults to initial state)
        test_mode: Compare the analytic Jacobian with central differences

    Returns:
        StructureReport; a singular A is reported as not output-controllable
    """
    A = linear.A
    eigenvalues = np.linalg.eigvals(A)
    abscissa = float(np.max(eigenvalues.real))
    off_diagonal = A[~np.eye(linear.size, dtype=bool)]
    is_metzler = bool(np.all(off_diagonal >= 0))
    is_hurwitz = abscissa < -HURWITZ_MARGIN

    diagnostic = ''
    gain: Optional[float] = None
    controllable = False
    try:
        gain = linear.static_gain
        scale = max(1.0, float(np.abs(A).max()))
        controllable = abs(gain) > 1e-12 / scale
        if not controllable:
            diagnostic = "C A^-1 B = 0: the actuated species does not reach the output at steady state"
    except StructureError as exc:
        diagnostic = str(exc)
        logger.warning(f"[CRN] {diagnostic}")

    fd_error = None
    if test_mode and network is not None:
        x = network.initial_state() if point is None else _as_state(network, point)
        analytic = network.jacobian_matrix(x)
        numeric = finite_difference_jacobian(network, x)
        fd_error = float(np.max(np.abs(analytic - numeric)) / max(1.0, np.max(np.abs(analytic))))

    return StructureReport(
        is_unimolecular=linear.exact,
        is_metzler=is_metzler,
        is_hurwitz=is_hurwitz,
        spectral_abscissa=abscissa,
        is_output_controllable=controllable,
        static_gain=gain,
        eigenvalues_of_A=tuple(complex(v) for v in eigenvalues),
        diagnostic=diagnostic,
        jacobian_fd_error=fd_error,
    )


def require_analyzable(linear: LinearForm) -> float:
    """Return g after checking A Hurwitz and g != 0; raises StructureError otherwise."""
    report = structural_checks(linear)
    if not report.is_hurwitz:
        raise StructureError(f"A is not Hurwitz (spectral abscissa {report.spectral_abscissa:.6g})")
    if not report.is_output_controllable:
        raise StructureError(f"Output controllability violated: {report.diagnostic}")
    return report.static_gain


def reaction_table(network: Network) -> List[str]:
    """Human-readable reaction list, one line per reaction."""
    lines = []
    for reaction in network.reactions:
        law = '' if reaction.rate_law.is_mass_action else (
            f" [hill theta={reaction.rate_law.theta:g} on {reaction.rate_law.repressor}]"
        )
        lines.append(f"{reaction.label}: {reaction.describe()}  k={reaction.rate_constant:.6g}{law}")
    return lines
