"""
Shared execution logic for scenarios.
Used by the run_scenario command; the recorded variant also updates the run registry.
"""
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd
from django.conf import settings
from django.utils import timezone

from core_engine.analysis.disturbance import disturbance_analysis
from core_engine.analysis.equilibria import dimerization_equilibrium, equilibria, solve_equilibrium_nonlinear
from core_engine.analysis.power import power_at_equilibrium, stationary_power
from core_engine.analysis.stability import alpha_bar, alpha_bar_bisection, stability_report
from core_engine.controller.motifs import ClosedLoop
from core_engine.crn.network import linearize, structural_checks
from core_engine.crn.serialization import save_network
from core_engine.dsd.compare import compare_traces, comparison_frame
from core_engine.dsd.compiler import compile_to_dsd
from core_engine.dsd.report import gate_depletion, gate_report
from core_engine.errors import ScenarioError, StructureError
from core_engine.sim.averages import power_trace, time_average
from core_engine.sim.integrator import Tolerances, integrate
from core_engine.sim.metrics import TrackingMetrics
from core_engine.sim.ssa import ssa_ensemble
from .models import RunArtifact, ScenarioRun
from .outputs import to_jsonable, write_dataframe_csv, write_summary, write_text, write_trajectory_csv
from .reports import SummaryReport
from .scenario import Scenario, apply_overrides

logger = logging.getLogger(__name__)

COMMANDS = ('analyze', 'simulate', 'compile-dsd', 'sweep')


def _is_ideal_linear(loop: ClosedLoop) -> bool:
    return loop.plant.is_unimolecular and loop.hill is None


def _analyze_linear(scenario: Scenario, loop: ClosedLoop, report: SummaryReport) -> None:
    params = scenario.params
    linear = loop.linear_form()
    structure = structural_checks(linear, loop.plant, test_mode=True)
    report.structure = structure.to_dict()
    if not (structure.is_hurwitz and structure.is_output_controllable):
        report.notes.append(f"Plant fails the structural assumptions: {structure.diagnostic or 'A not Hurwitz'}")
        return
    pair = equilibria(linear, params)
    report.equilibria = pair.to_dict()
    if not pair.positive_exists:
        report.notes.append("No positive equilibrium for this reference")
        return
    stability = stability_report(linear, params).to_dict()
    stability['alpha_bar_bisection'] = alpha_bar_bisection(linear, params.mu)
    report.stability = stability
    report.power = stationary_power(linear, params, scenario.costs_model).to_dict()
    if scenario.disturbance:
        E = loop.disturbance_inputs
        report.disturbance = disturbance_analysis(linear, params, E, loop.disturbance).to_dict()


def _analyze_nonlinear(scenario: Scenario, loop: ClosedLoop, report: SummaryReport) -> None:
    """Newton on the full closed loop, seeded by a constant-parameter simulation."""
    params = scenario.params
    sim = scenario.simulation
    traj = integrate(loop, None, sim['t_end'], scenario.tolerances, sim['samples'])
    guess = np.maximum(traj.final_state(), 1e-9)
    newton = solve_equilibrium_nonlinear(loop, guess)
    report.nonlinear = newton.to_dict()
    v_star = float(newton.state[loop.controller_index])
    report.power = power_at_equilibrium(params, v_star, scenario.costs_model).to_dict()

    plant_point = newton.state[:loop.plant.size]
    linear = linearize(loop.plant, plant_point)
    structure = structural_checks(linear, loop.plant, point=plant_point, test_mode=True)
    report.structure = structure.to_dict()
    if loop.hill is None and structure.is_hurwitz and structure.is_output_controllable:
        threshold = alpha_bar(linear, params.mu)
        report.stability = {
            'alpha_bar': threshold.alpha_bar,
            'omega_star': threshold.omega_star,
            'weakly_spr': threshold.weakly_spr,
            'nonpositive_crossings': threshold.nonpositive_crossings,
            'best_alpha': None,
            'stable': newton.stable,
            'local': True,
        }

    builtin = scenario.network.get('builtin')
    if builtin == 'dimerization' and loop.hill is None:
        rates = {r.label: r.rate_constant for r in loop.plant.reactions}
        closed_form = dimerization_equilibrium(rates['gamma_1'], rates['k_12'], rates['gamma_2'], rates['k_21'],
                                               params.mu, params.k)
        report.equilibria = {'positive': closed_form.tolist(), 'positive_exists': True, 'closed_form': True}
    if loop.hill is not None and builtin == 'birth_death':
        gamma = loop.plant.reaction('gamma').rate_constant
        x_star, hill_v = loop.hill.birth_death_equilibrium(params, gamma)
        report.equilibria = {'positive': [x_star, hill_v], 'positive_exists': True, 'closed_form': True,
                             'rho': loop.hill.rho(params, gamma)}


def analyze(scenario: Scenario, report: SummaryReport) -> None:
    loop = scenario.build_closed_loop()
    if _is_ideal_linear(loop):
        _analyze_linear(scenario, loop, report)
    else:
        _analyze_nonlinear(scenario, loop, report)


def simulate(scenario: Scenario, report: SummaryReport, directory: Path) -> None:
    loop = scenario.build_closed_loop()
    schedule = scenario.build_schedule()
    sim = scenario.simulation
    traj = integrate(loop, schedule, sim['t_end'], scenario.tolerances, sim['samples'])
    report.artifacts.append(('trajectory', str(write_trajectory_csv(traj, directory / 'trajectory.csv'))))

    report.tracking = TrackingMetrics.calculate_metrics(traj, settling_fraction=sim['settling_fraction'])
    start = sim.get('averages_from') or 0.0
    averages = time_average(traj, start=start)
    report.averages = {name: float(averages[name].iloc[-1]) for name in traj.species_names}
    report.averages['from'] = start
    report.artifacts.append(('averages', str(write_dataframe_csv(averages, directory / 'averages.csv'))))

    if loop.hill is None:
        energy = power_trace(traj, scenario.costs_model)
        report.energy = energy.to_dict()
        report.artifacts.append(('power', str(write_dataframe_csv(energy.to_dataframe(), directory / 'power.csv'))))
    else:
        report.notes.append("Power trace omitted: the Hill reference reaction does not follow alpha*mu*v")

    if sim.get('ssa'):
        if not sim.get('volume_scale'):
            raise ScenarioError("simulation.volume_scale is required when simulation.ssa is true")
        if len(schedule):
            report.notes.append("SSA runs use constant parameters; the schedule is ignored")
        ensemble = ssa_ensemble(loop, sim['volume_scale'], sim['t_end'], sim['runs'], seed=sim['seed'],
                                samples=min(sim['samples'], 1000))
        report.ssa = ensemble.to_dict()
        report.artifacts.append(('ssa_mean', str(write_dataframe_csv(ensemble.mean_frame(), directory / 'ssa_mean.csv'))))


def _mu_scale(scenario: Scenario) -> float:
    values = [scenario.params.mu]
    values += [e.value for e in scenario.build_schedule() if e.target == 'controller.mu']
    return max(values)


def compile_dsd(scenario: Scenario, report: SummaryReport, directory: Path) -> None:
    if not scenario.dsd:
        raise ScenarioError("compile-dsd needs a dsd block with omega")
    loop = scenario.build_closed_loop()
    schedule = scenario.build_schedule()
    sim = scenario.simulation
    block = scenario.dsd
    circuit = compile_to_dsd(loop, block['omega'], block['lambda_fast'])
    report.artifacts.append(('network', str(save_network(circuit.network, _ensure(directory) / 'dsd_network.json'))))

    ideal = integrate(loop, schedule, sim['t_end'], scenario.tolerances, sim['samples'])
    circuit_tolerances = Tolerances(rtol=sim['rtol'], atol=sim['atol'], method=block['method'])
    traj = integrate(circuit, schedule, sim['t_end'], circuit_tolerances, sim['samples'])

    band = block['band'] * _mu_scale(scenario)
    metrics = compare_traces(ideal, traj, band=band, grid=ideal.times)
    depletion = gate_depletion(circuit, traj)
    report.dsd = {
        'omega': circuit.omega,
        'lambda_fast': circuit.lambda_fast,
        'expanded_reactions': len(circuit.network.reactions),
        'complexes': len(circuit.gates),
        'calibration': circuit.calibration,
        'comparison': metrics.to_dict(),
        'depletion': depletion.to_dict(),
    }
    frame = comparison_frame(ideal, traj, grid=ideal.times)
    report.artifacts.append(('comparison', str(write_dataframe_csv(frame, directory / 'comparison.csv'))))
    report.artifacts.append(('dsd_trajectory', str(write_trajectory_csv(traj, directory / 'dsd_trajectory.csv'))))
    report.artifacts.append(('gate_depletion', str(write_dataframe_csv(depletion.fractions,
                                                                       directory / 'gate_depletion.csv'))))
    report.artifacts.append(('gate_report', str(write_text(gate_report(circuit, traj), directory / 'gate_report.txt'))))


def sweep_point(raw: Dict, path: Optional[str], overrides: Dict) -> Dict:
    """One sweep row: tracking metrics and, for linear plants, alpha_bar and P*."""
    scenario = Scenario.from_dict(apply_overrides(raw, overrides), Path(path) if path else None)
    loop = scenario.build_closed_loop()
    sim = scenario.simulation
    traj = integrate(loop, scenario.build_schedule(), sim['t_end'], scenario.tolerances, sim['samples'])
    metrics = TrackingMetrics.calculate_metrics(traj, settling_fraction=sim['settling_fraction'])
    last = metrics['segments'][-1]
    row = dict(overrides)
    row.update({
        'final_error': metrics['final_error'],
        'max_settled_error': last['max_settled_error'],
        'settling_time': last['settling_time'],
        'adapted': metrics['adapted'],
        'alpha_bar': None,
        'stationary_power': None,
    })
    if _is_ideal_linear(loop):
        linear = loop.linear_form()
        try:
            row['alpha_bar'] = alpha_bar(linear, scenario.params.mu).alpha_bar
            row['stationary_power'] = stationary_power(linear, scenario.params, scenario.costs_model).total
        except (StructureError, ValueError) as e:
            logger.warning(f"[SCENARIO] Sweep point {overrides}: {e}")
    return row


def sweep_workers(scenario: Scenario, workers: Optional[int] = None) -> int:
    """Worker count: explicit argument, then the sweep block, then CRN_CONTROL SWEEP_WORKERS."""
    fallback = getattr(settings, 'CRN_CONTROL', {}).get('SWEEP_WORKERS') or 1
    return int(workers or scenario.sweep.get('workers') or fallback)


def sweep(scenario: Scenario, report: SummaryReport, directory: Path, workers: Optional[int] = None) -> None:
    if not scenario.sweep:
        raise ScenarioError("sweep needs a sweep block with parameters")
    parameters = scenario.sweep['parameters']
    paths = list(parameters)
    points = [dict(zip(paths, values)) for values in itertools.product(*(parameters[p] for p in paths))]
    workers = sweep_workers(scenario, workers)
    path = str(scenario.path) if scenario.path else None
    logger.info(f"[SCENARIO] Sweeping {len(points)} point(s) with {workers} worker(s)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(sweep_point, [scenario.raw] * len(points), [path] * len(points), points))
    else:
        rows = [sweep_point(scenario.raw, path, point) for point in points]
    report.sweep = rows
    frame = pd.DataFrame(rows)
    report.artifacts.append(('sweep', str(write_dataframe_csv(frame, directory / 'sweep.csv'))))


def _ensure(directory: Path) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def run_scenario(command: str, scenario: Scenario, output_dir: Optional[Path] = None,
                 workers: Optional[int] = None) -> SummaryReport:
    """
    Execute one command on a validated scenario and write its artifacts.

    Returns:
        SummaryReport (also written as summary.json in the output directory)

    Raises:
        ScenarioError: Unknown command or missing scenario block
        Any core_engine error raised by the underlying operation
    """
    if command not in COMMANDS:
        raise ScenarioError(f"Unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    directory = scenario.output_directory(output_dir)
    report = SummaryReport(scenario=scenario.name, command=command)
    if command == 'analyze':
        analyze(scenario, report)
    elif command == 'simulate':
        simulate(scenario, report, directory)
    elif command == 'compile-dsd':
        compile_dsd(scenario, report, directory)
    else:
        sweep(scenario, report, directory, workers)
    summary_path = write_summary(report.to_dict(), directory / 'summary.json')
    report.artifacts.append(('summary', str(summary_path)))
    return report


def execute_scenario_run(run: ScenarioRun, scenario: Scenario, output_dir: Optional[Path] = None,
                         workers: Optional[int] = None) -> SummaryReport:
    """
    Execute a recorded run, keeping its status and artifacts in the registry.

    Raises:
        Whatever run_scenario raises, after marking the run failed
    """
    run.status = 'running'
    run.save()
    try:
        report = run_scenario(run.command, scenario, output_dir, workers)
    except Exception as e:
        run.status = 'failed'
        run.error_message = str(e)
        run.finished_at = timezone.now()
        run.save()
        raise
    for kind, path in report.artifacts:
        RunArtifact.objects.create(run=run, kind=kind, path=path)
    run.summary = to_jsonable(report.to_dict())
    run.status = 'completed'
    run.finished_at = timezone.now()
    run.save()
    return report
