"""
Two-step strand-displacement template.

Every formal reaction ``R -> P`` with label L and rate q becomes

    recruit   R (+ g_L) -> u_L + w_L_r
    release   u_L + t_L -> P + w_L_p        (rate lambda_fast)

where g_L is a recruit gate and t_L a translator, both supplied at Omega.
Unimolecular and zeroth-order reactions consume the gate in the recruit step,
so the recruit constant is q / Omega (effective first-order rate lambda * Omega = q
while the gate is in excess).

Bimolecular reactions ``A + B -> P`` first load A onto the gate reversibly and
recruit B from the loaded complex h_L:

    bind      A + g_L -> h_L                 (rate lambda_fast)
    unbind    h_L -> A + g_L                 (rate lambda_fast * Omega / BIND_FRACTION)
    recruit   h_L + B -> u_L + w_L_r         (rate q / BIND_FRACTION)

At pre-equilibrium h_L = BIND_FRACTION * (g_L / Omega) * A, so the recruit flux is
q * (g_L / Omega) * A * B and only BIND_FRACTION of A is held on the gate.
The approximation holds while q * B stays well below lambda_fast * Omega.
Catalysts reappear in the release products.
"""
import logging
from typing import Dict, List, Tuple, Union

from core_engine.controller.motifs import ClosedLoop
from core_engine.crn.network import build_network
from core_engine.crn.schemas import Network, Reaction, Species
from core_engine.errors import CompilationError
from .schemas import MESSENGER, RECRUIT, RELEASE, SIGNAL, WASTE, DsdCircuit, Gate, Strand

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_FAST = 0.01
BIND_FRACTION = 1e-3


def gate_name(label: str) -> str:
    return f"g_{label}"


def translator_name(label: str) -> str:
    return f"t_{label}"


def loaded_name(label: str) -> str:
    return f"h_{label}"


def messenger_name(label: str) -> str:
    return f"u_{label}"


def waste_names(label: str) -> Tuple[str, str]:
    return f"w_{label}_r", f"w_{label}_p"


def _check_formal(network: Network, formal) -> None:
    if isinstance(formal, ClosedLoop) and any(value > 0 for value in formal.inflow):
        raise CompilationError("Closed loops with active disturbances cannot be compiled")
    for reaction in network.reactions:
        if not reaction.rate_law.is_mass_action:
            raise CompilationError(f"Reaction {reaction.label} uses a {reaction.rate_law.kind} rate law; "
                                   f"only mass-action reactions can be compiled")
        if reaction.order > 2:
            raise CompilationError(f"Reaction {reaction.label} is of order {reaction.order}; at most 2 is supported")


def _signal_strands(network: Network) -> Tuple[List[Strand], Dict[str, Strand]]:
    strands = []
    for i, name in enumerate(network.species_names, start=1):
        strands.append(Strand(name, SIGNAL, (f"t{i}", f"d{i}", f"T{i}")))
    return strands, {s.name: s for s in strands}


def _complement(domains) -> Tuple[str, ...]:
    return tuple(f"{d}*" for d in domains)


def compile_to_dsd(formal: Union[ClosedLoop, Network], omega: float,
                   lambda_fast: float = DEFAULT_LAMBDA_FAST) -> DsdCircuit:
    """
    Compile a formal mass-action network (or closed loop) into an expanded circuit.

    Args:
        formal: Closed loop or bare network (signal species keep their names)
        omega: Initial concentration of every gate and translator (nM)
        lambda_fast: Release-step constant (nM^-1 s^-1)

    Returns:
        DsdCircuit whose network follows the declared order: signals, gates,
        translators, loaded gates, messengers, waste

    Raises:
        CompilationError: Hill rate law, termolecular reaction, Omega or lambda_fast <= 0,
            active disturbance, or a name clash with generated species
    """
    if not omega > 0:
        raise CompilationError(f"Omega must be > 0, got {omega}")
    if not lambda_fast > 0:
        raise CompilationError(f"lambda_fast must be > 0, got {lambda_fast}")
    network = formal.network if isinstance(formal, ClosedLoop) else formal
    _check_formal(network, formal)

    strands, signal_by_name = _signal_strands(network)
    gates: List[Gate] = []
    messengers: List[Strand] = []
    wastes: List[Strand] = []
    reactions: List[Reaction] = []
    calibration: Dict[str, float] = {}
    reaction_map: Dict[str, Tuple[str, str]] = {}
    binding_map: Dict[str, Tuple[str, str]] = {}

    for j, reaction in enumerate(network.reactions, start=1):
        label = reaction.label
        u = messenger_name(label)
        w_recruit, w_release = waste_names(label)
        messenger = Strand(u, MESSENGER, (f"tu{j}", f"du{j}", f"Tu{j}"))
        messengers.append(messenger)
        wastes.extend([Strand(w_recruit, WASTE, (f"wr{j}",)), Strand(w_release, WASTE, (f"wp{j}",))])

        reactant_domains = []
        for name, count in reaction.reactants.items():
            reactant_domains.extend(_complement(signal_by_name[name].domains) * count)

        gate = gate_name(label)
        recruit_reactants = dict(reaction.reactants)
        loaded = None
        if reaction.order < 2:
            recruit_reactants[gate] = 1
            rate = reaction.rate_constant / omega
        else:
            first = next(iter(reaction.reactants))
            recruit_reactants[first] -= 1
            recruit_reactants = {name: n for name, n in recruit_reactants.items() if n > 0}
            loaded = loaded_name(label)
            recruit_reactants[loaded] = 1
            rate = reaction.rate_constant / BIND_FRACTION
            bind_label, unbind_label = f"{label}_bind", f"{label}_unbind"
            reactions.append(Reaction({first: 1, gate: 1}, {loaded: 1}, lambda_fast, label=bind_label))
            reactions.append(Reaction({loaded: 1}, {first: 1, gate: 1}, lambda_fast * omega / BIND_FRACTION,
                                      label=unbind_label))
            binding_map[label] = (bind_label, unbind_label)
        gates.append(Gate(
            name=gate, consumed_by=label, initial_concentration=omega, stage=RECRUIT,
            binds=tuple(reaction.reactants), releases=(u, w_recruit),
            domains=tuple(reactant_domains) + messenger.domains, loaded=loaded,
        ))
        calibration[label] = rate

        translator = translator_name(label)
        product_domains = []
        for name, count in reaction.products.items():
            product_domains.extend(signal_by_name[name].domains * count)
        gates.append(Gate(
            name=translator, consumed_by=label, initial_concentration=omega, stage=RELEASE,
            binds=(u,), releases=tuple(reaction.products) + (w_release,),
            domains=_complement(messenger.domains) + tuple(product_domains),
        ))

        recruit_label, release_label = f"{label}_recruit", f"{label}_release"
        reactions.append(Reaction(recruit_reactants, {u: 1, w_recruit: 1}, rate, label=recruit_label))
        release_products = dict(reaction.products)
        release_products[w_release] = 1
        reactions.append(Reaction({u: 1, translator: 1}, release_products, lambda_fast, label=release_label))
        reaction_map[label] = (recruit_label, release_label)

    loaded_names = [g.loaded for g in gates if g.loaded]
    generated = [g.name for g in gates] + loaded_names + [s.name for s in messengers + wastes]
    clash = set(generated) & set(network.species_names)
    if clash:
        raise CompilationError(f"Generated species clash with formal species: {sorted(clash)}")

    species = list(network.species)
    species += [Species(g.name, omega) for g in gates if g.stage == RECRUIT]
    species += [Species(g.name, omega) for g in gates if g.stage == RELEASE]
    species += [Species(name, 0.0) for name in loaded_names]
    species += [Species(s.name, 0.0) for s in messengers + wastes]
    expanded = build_network(species, reactions, controlled=network.controlled, actuated=network.actuated)

    logger.info(f"[DSD] Compiled {len(network.reactions)} formal reactions into {len(reactions)} "
                f"expanded reactions with {len(gates)} gates/translators at Omega={omega:g} nM")
    return DsdCircuit(
        formal=formal,
        network=expanded,
        strands=strands + messengers + wastes,
        gates=gates,
        omega=float(omega),
        lambda_fast=float(lambda_fast),
        calibration=calibration,
        reaction_map=reaction_map,
        binding_map=binding_map,
    )
