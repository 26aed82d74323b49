"""
Network file format (JSON).

The same document describes hand-written networks and compiled strand-displacement
circuits::

    {"species": [{"name": "x", "initial": 0.0}],
     "reactions": [{"label": "gamma", "reactants": {"x": 1}, "products": {},
                    "rate": 0.5, "rate_law": {"kind": "mass_action"}}],
     "controlled": "x", "actuated": "x"}
"""
import json
from pathlib import Path
from typing import Dict, Union

from core_engine.errors import NetworkValidationError
from .network import build_network
from .schemas import Network, RateLaw, Reaction


def rate_law_from_dict(data: Dict) -> RateLaw:
    if not data:
        return RateLaw()
    return RateLaw(kind=data.get('kind', 'mass_action'), theta=data.get('theta'), repressor=data.get('repressor'))


def reaction_from_dict(data: Dict) -> Reaction:
    if 'rate' not in data:
        raise NetworkValidationError(f"Reaction {data.get('label', '?')} has no rate")
    return Reaction(
        reactants=data.get('reactants') or {},
        products=data.get('products') or {},
        rate_constant=data['rate'],
        rate_law=rate_law_from_dict(data.get('rate_law')),
        label=data.get('label', ''),
    )


def network_from_dict(data: Dict) -> Network:
    """Parse the network document; raises NetworkValidationError on bad content."""
    try:
        species = data['species']
    except (KeyError, TypeError):
        raise NetworkValidationError("Network document needs a 'species' list")
    reactions = [reaction_from_dict(r) for r in data.get('reactions', [])]
    return build_network(species, reactions, controlled=data.get('controlled'), actuated=data.get('actuated'))


def network_to_dict(network: Network) -> Dict:
    return network.to_dict()


def save_network(network: Network, path: Union[str, Path]) -> Path:
    path = Path(path)
    text = json.dumps(network_to_dict(network), indent=2)
    path.write_text(text + '\n', encoding='utf-8', newline='\n')
    return path


def load_network(path: Union[str, Path]) -> Network:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise NetworkValidationError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    return network_from_dict(data)


def networks_equivalent(first: Network, second: Network, rtol: float = 1e-12) -> bool:
    """Same species (with initial values), same labelled reactions and rates."""
    if first.species_names != second.species_names:
        return False
    if any(abs(a.initial_concentration - b.initial_concentration) > rtol * max(1.0, a.initial_concentration)
           for a, b in zip(first.species, second.species)):
        return False
    if first.reaction_labels != second.reaction_labels:
        return False
    for a, b in zip(first.reactions, second.reactions):
        if a.reactants != b.reactants or a.products != b.products or a.rate_law != b.rate_law:
            return False
        if abs(a.rate_constant - b.rate_constant) > rtol * a.rate_constant:
            return False
    return first.controlled == second.controlled and first.actuated == second.actuated
