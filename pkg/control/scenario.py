"""
Scenario documents: parsing, dotted-path overrides and construction of engine objects.
"""
import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from django.conf import settings

from core_engine.analysis.power import MetabolicCosts
from core_engine.controller.motifs import (
    ClosedLoop,
    ControllerParams,
    HillParams,
    attach_hill_controller,
    attach_integral_controller,
    disturbance_matrix,
)
from core_engine.crn.schemas import Network
from core_engine.crn.serialization import load_network, network_from_dict
from core_engine.errors import NetworkValidationError, ParameterError, ScenarioError
from core_engine.registry import NetworkRegistry
from core_engine.sim.integrator import Tolerances
from core_engine.sim.schedule import Schedule
from .forms import (
    ControllerForm,
    CostsForm,
    DisturbanceForm,
    DsdForm,
    NetworkForm,
    OutputsForm,
    RandomProfileForm,
    ScenarioForm,
    ScheduleForm,
    SimulationForm,
    SweepForm,
)

logger = logging.getLogger(__name__)


@dataclass
class Scenario:
    """Validated scenario document; ``path`` anchors relative network files."""
    name: str
    description: str
    network: Dict
    controller: Dict
    disturbance: Optional[Dict] = None
    schedule: Dict = field(default_factory=lambda: {'events': []})
    simulation: Dict = field(default_factory=dict)
    dsd: Optional[Dict] = None
    costs: Dict = field(default_factory=dict)
    sweep: Optional[Dict] = None
    outputs: Dict = field(default_factory=dict)
    path: Optional[Path] = None
    raw: Dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Dict, path: Optional[Path] = None) -> 'Scenario':
        """Validate every block; raises ScenarioError naming the offending key."""
        top = ScenarioForm.validate_block(data, 'scenario')
        simulation = SimulationForm.validate_block(top.get('simulation'), 'simulation')
        defaults = getattr(settings, 'CRN_CONTROL', {})
        for key, setting in (('rtol', 'RTOL'), ('atol', 'ATOL'), ('samples', 'SAMPLES')):
            if simulation.get(key) is None:
                simulation[key] = defaults.get(setting, {'RTOL': 1e-8, 'ATOL': 1e-10, 'SAMPLES': 1000}[setting])
        schedule = ScheduleForm.validate_block(top.get('schedule'), 'schedule')
        if schedule.get('random_profile'):
            schedule['random_profile'] = RandomProfileForm.validate_block(schedule['random_profile'],
                                                                          'schedule.random_profile')
        scenario = cls(
            name=top['name'],
            description=top.get('description') or '',
            network=NetworkForm.validate_block(top['network'], 'network'),
            controller=ControllerForm.validate_block(top['controller'], 'controller'),
            disturbance=(DisturbanceForm.validate_block(top['disturbance'], 'disturbance')
                         if top.get('disturbance') else None),
            schedule=schedule,
            simulation=simulation,
            dsd=DsdForm.validate_block(top['dsd'], 'dsd') if top.get('dsd') else None,
            costs=CostsForm.validate_block(top.get('costs'), 'costs'),
            sweep=SweepForm.validate_block(top['sweep'], 'sweep') if top.get('sweep') else None,
            outputs=OutputsForm.validate_block(top.get('outputs'), 'outputs'),
            path=path,
            raw=copy.deepcopy(data),
        )
        # engine preconditions surface at load time
        loop = scenario.build_closed_loop()
        for event in scenario.build_schedule():
            try:
                loop.with_parameter(event.target, event.value)
            except ValueError as e:
                raise ScenarioError(f"schedule: {e}")
        return scenario

    @property
    def params(self) -> ControllerParams:
        c = self.controller
        return ControllerParams(mu=c['mu'], alpha=c['alpha'], k=c['k'], v0=c['v0'])

    @property
    def costs_model(self) -> MetabolicCosts:
        return MetabolicCosts(**self.costs)

    @property
    def tolerances(self) -> Tolerances:
        s = self.simulation
        return Tolerances(rtol=s['rtol'], atol=s['atol'], method=s['method'], max_step=s['max_step'])

    def build_plant(self) -> Network:
        spec = self.network
        try:
            if spec.get('builtin'):
                plant = NetworkRegistry.build(spec['builtin'], **(spec.get('parameters') or {}))
            elif spec.get('file'):
                location = Path(spec['file'])
                if not location.is_absolute() and self.path is not None:
                    location = self.path.parent / location
                plant = load_network(location)
            else:
                document = {key: spec[key] for key in ('species', 'reactions', 'controlled', 'actuated')
                            if spec.get(key) is not None}
                plant = network_from_dict(document)
            if spec.get('initial'):
                plant = plant.with_initial(spec['initial'])
        except (ValueError, ImportError, OSError) as e:
            raise ScenarioError(f"network: {e}")
        return plant

    def build_closed_loop(self) -> ClosedLoop:
        plant = self.build_plant()
        try:
            params = self.params
            if self.controller.get('theta') is not None:
                loop = attach_hill_controller(plant, params, HillParams(self.controller['theta']))
            else:
                loop = attach_integral_controller(plant, params)
            if self.disturbance:
                E = disturbance_matrix(plant, self.disturbance['columns'])
                loop = loop.with_disturbance(E, np.asarray(self.disturbance['d'], dtype=float))
        except (NetworkValidationError, ParameterError) as e:
            raise ScenarioError(f"controller: {e}")
        return loop

    def build_schedule(self) -> Schedule:
        try:
            schedule = Schedule.from_events(self.schedule.get('events') or [])
            profile = self.schedule.get('random_profile')
            if profile:
                schedule = schedule.merged(Schedule.random_steps(**profile))
        except ParameterError as e:
            raise ScenarioError(f"schedule: {e}")
        return schedule

    def output_directory(self, override: Optional[Union[str, Path]] = None) -> Path:
        if override:
            return Path(override)
        if self.outputs.get('directory'):
            directory = Path(self.outputs['directory'])
            if not directory.is_absolute() and self.path is not None:
                directory = self.path.parent / directory
            return directory
        base = getattr(settings, 'CRN_CONTROL', {}).get('OUTPUT_DIR', 'outputs')
        return Path(base) / self.name

    def with_overrides(self, overrides: Dict[str, object]) -> 'Scenario':
        return Scenario.from_dict(apply_overrides(self.raw, overrides), self.path)


def parse_override(text: str):
    """``path=value`` where value is JSON when it parses, a plain string otherwise."""
    if '=' not in text:
        raise ScenarioError(f"Override {text!r} must look like path=value")
    path, raw = text.split('=', 1)
    path = path.strip()
    if not path:
        raise ScenarioError(f"Override {text!r} has an empty path")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(data: Dict, overrides: Union[Dict[str, object], Sequence[str]]) -> Dict:
    """
    Copy of ``data`` with dotted-path assignments applied.

    ``controller.alpha`` and ``simulation.t_end`` address scenario keys; schedule
    targets (``rate.<label>``, ``disturbance.d.<i>``) are not overrides.
    """
    if not isinstance(overrides, dict):
        overrides = dict(parse_override(text) for text in overrides)
    result = copy.deepcopy(data)
    for path, value in overrides.items():
        keys = path.split('.')
        node = result
        for key in keys[:-1]:
            if isinstance(node, list):
                node = _list_item(node, key, path)
                continue
            if key not in node or node[key] is None:
                node[key] = {}
            node = node[key]
            if not isinstance(node, (dict, list)):
                raise ScenarioError(f"Override {path}: {key} is not a block")
        last = keys[-1]
        if isinstance(node, list):
            index = int(last) if last.isdigit() else None
            if index is None or index >= len(node):
                raise ScenarioError(f"Override {path}: bad list index {last}")
            node[index] = value
        else:
            node[last] = value
        logger.debug(f"[SCENARIO] Override {path} = {value!r}")
    return result


def _list_item(node: List, key: str, path: str):
    if not key.isdigit() or int(key) >= len(node):
        raise ScenarioError(f"Override {path}: bad list index {key}")
    return node[int(key)]


def load_scenario(path: Union[str, Path], overrides: Optional[Union[Dict, Sequence[str]]] = None) -> Scenario:
    """
    Read, override and validate a scenario file.

    Raises:
        ScenarioError: Unreadable file, JSON syntax error (with line and column),
            unknown key or failed precondition
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario {path}: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    if overrides:
        data = apply_overrides(data, overrides)
    scenario = Scenario.from_dict(data, path)
    logger.info(f"[SCENARIO] Loaded {scenario.name} from {path}")
    return scenario
