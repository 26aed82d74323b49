"""
Example plant networks with their nominal parameters.

Rate names double as reaction labels, so schedules can address them as
``rate.<label>`` (for instance ``rate.k_p`` or ``rate.gamma_q``).
"""
from typing import Dict, Optional

from .network import build_network
from .schemas import Network, Reaction, Species


def _initial(names, initial: Optional[Dict[str, float]]):
    initial = initial or {}
    return [Species(name, initial.get(name, 0.0)) for name in names]


def birth_death(gamma: float = 1.0, k_b: Optional[float] = None,
                initial: Optional[Dict[str, float]] = None) -> Network:
    """
    Birth-death process 0 -> x (k_b), x -> 0 (gamma).

    Without ``k_b`` the birth channel is left to the controller's actuation reaction.
    """
    reactions = []
    if k_b is not None:
        reactions.append(Reaction({}, {'x': 1}, k_b, label='k_b'))
    reactions.append(Reaction({'x': 1}, {}, gamma, label='gamma'))
    return build_network(_initial(['x'], initial), reactions, controlled='x', actuated='x')


def death_process(gamma: float = 0.002, initial: Optional[Dict[str, float]] = None) -> Network:
    """Pure degradation x -> 0, the plant of the strand-displacement demonstration."""
    reactions = [Reaction({'x': 1}, {}, gamma, label='gamma')]
    return build_network(_initial(['x'], initial), reactions, controlled='x', actuated='x')


def gene_expression(gamma_m: float = 1.2337, k_p: float = 1.4513, gamma_p: float = 3.0155,
                    k_q: float = 2.3679, gamma_q: float = 1.1114,
                    initial: Optional[Dict[str, float]] = None) -> Network:
    """
    Gene expression with maturation: mRNA m, immature protein p, mature protein q.

    Transcription is the actuated input; the mature protein is measured.
    """
    reactions = [
        Reaction({'m': 1}, {}, gamma_m, label='gamma_m'),
        Reaction({'m': 1}, {'m': 1, 'p': 1}, k_p, label='k_p'),
        Reaction({'p': 1}, {}, gamma_p, label='gamma_p'),
        Reaction({'p': 1}, {'q': 1}, k_q, label='k_q'),
        Reaction({'q': 1}, {}, gamma_q, label='gamma_q'),
    ]
    return build_network(_initial(['m', 'p', 'q'], initial), reactions, controlled='q', actuated='m')


def dimerization(gamma_1: float = 1.0, k_12: float = 1.0, gamma_2: float = 2.0, k_21: float = 2.0,
                 initial: Optional[Dict[str, float]] = None) -> Network:
    """Reversible dimerization 2 x1 <-> x2 with degradation of both forms; the dimer is measured."""
    reactions = [
        Reaction({'x1': 1}, {}, gamma_1, label='gamma_1'),
        Reaction({'x1': 2}, {'x2': 1}, k_12, label='k_12'),
        Reaction({'x2': 1}, {'x1': 2}, k_21, label='k_21'),
        Reaction({'x2': 1}, {}, gamma_2, label='gamma_2'),
    ]
    return build_network(_initial(['x1', 'x2'], initial), reactions, controlled='x2', actuated='x1')
