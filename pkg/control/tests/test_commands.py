"""
End-to-end runs through the management commands, plus the run registry.
"""
import json
import shutil
import tempfile
from io import StringIO
from pathlib import Path

import pandas as pd
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase, override_settings

from control.models import RunArtifact, ScenarioRun
from control.scenario import Scenario
from control.services import execute_scenario_run, sweep_workers
from core_engine.crn.network import linearize
from core_engine.errors import ScenarioError

SCENARIOS = Path(settings.BASE_DIR) / 'scenarios'

BIRTH_DEATH = {
    'name': 'birth_death_loop',
    'network': {'builtin': 'birth_death', 'parameters': {'gamma': 1.0}},
    'controller': {'mu': 2.0, 'alpha': 1.0, 'k': 1.0, 'v0': 1.0},
    'schedule': {'events': [{'time': 40, 'target': 'controller.mu', 'value': 3.0}]},
    'simulation': {'t_end': 80, 'samples': 401},
    'sweep': {'parameters': {'controller.k': [1.0, 2.0], 'controller.alpha': [0.5]}},
}


class CommandTestCase(TestCase):

    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def write_scenario(self, data, name='scenario.json'):
        path = self.tmp / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path

    def run_command(self, command, path, output='out', **options):
        stdout = StringIO()
        call_command('run_scenario', command, str(path), output_dir=str(self.tmp / output),
                     stdout=stdout, **options)
        return stdout.getvalue()

    def summary(self, output='out'):
        return json.loads((self.tmp / output / 'summary.json').read_text(encoding='utf-8'))


class AnalyzeCommandTests(CommandTestCase):

    def test_gene_expression_threshold(self):
        output = self.run_command('analyze', SCENARIOS / 'gene_tracking.json')
        self.assertIn('analyze completed successfully', output)
        summary = self.summary()
        self.assertAlmostEqual(summary['stability']['alpha_bar'], 0.8437, delta=1e-3)
        self.assertAlmostEqual(summary['stability']['alpha_bar_bisection'], summary['stability']['alpha_bar'],
                               delta=1e-6)
        self.assertAlmostEqual(summary['equilibria']['positive'][2], 2.0, places=8)
        self.assertTrue(summary['structure']['is_hurwitz'])
        self.assertGreater(summary['power']['total'], 0.0)

    def test_birth_death_threshold_is_infinite(self):
        self.run_command('analyze', self.write_scenario(BIRTH_DEATH))
        self.assertEqual(self.summary()['stability']['alpha_bar'], 'inf')

    def test_disturbance_analysis(self):
        self.run_command('analyze', SCENARIOS / 'gene_disturbance.json', overrides=['disturbance.d=[4]'])
        disturbance = self.summary()['disturbance']
        self.assertTrue(disturbance['admissible'])
        self.assertGreater(disturbance['alpha_bar_d'], disturbance['alpha_bar'])

    def test_hill_closed_form(self):
        self.run_command('analyze', SCENARIOS / 'hill.json')
        summary = self.summary()
        self.assertAlmostEqual(summary['equilibria']['positive'][0], 1.99602, places=4)
        self.assertAlmostEqual(summary['nonlinear']['state'][0], summary['equilibria']['positive'][0], places=6)
        self.assertAlmostEqual(summary['equilibria']['rho'], 500.0)

    def test_dimerization_equilibrium(self):
        self.run_command('analyze', SCENARIOS / 'dimer_tracking.json')
        summary = self.summary()
        self.assertAlmostEqual(summary['equilibria']['positive'][2], 1.08284, places=4)
        self.assertTrue(summary['nonlinear']['stable'])


class SimulateCommandTests(CommandTestCase):

    def test_artifacts(self):
        path = self.write_scenario(BIRTH_DEATH)
        self.run_command('simulate', path)
        out = self.tmp / 'out'
        for name in ('trajectory.csv', 'averages.csv', 'power.csv', 'summary.json'):
            self.assertTrue((out / name).exists(), name)
        frame = pd.read_csv(out / 'trajectory.csv')
        self.assertEqual(list(frame.columns), ['t', 'x', 'v'])
        self.assertEqual(len(frame), 401)
        tracking = self.summary()['tracking']
        self.assertEqual(len(tracking['segments']), 2)
        self.assertTrue(tracking['adapted'])

    def test_outputs_are_reproducible(self):
        path = self.write_scenario(BIRTH_DEATH)
        self.run_command('simulate', path, output='first')
        self.run_command('simulate', path, output='second')
        for name in ('trajectory.csv', 'averages.csv', 'power.csv'):
            first = (self.tmp / 'first' / name).read_bytes()
            second = (self.tmp / 'second' / name).read_bytes()
            self.assertEqual(first, second, name)
        self.assertNotIn(b'\r\n', (self.tmp / 'first' / 'trajectory.csv').read_bytes())

    def test_hill_loop_skips_power(self):
        self.run_command('simulate', SCENARIOS / 'hill.json', overrides=['simulation.t_end=20'])
        summary = self.summary()
        self.assertNotIn('energy', summary)
        self.assertTrue(any('Power trace omitted' in note for note in summary['notes']))

    def test_ssa_ensemble(self):
        self.run_command('simulate', SCENARIOS / 'ssa.json',
                         overrides=['simulation.runs=10', 'simulation.t_end=10'])
        summary = self.summary()
        self.assertEqual(summary['ssa']['runs'], 10)
        self.assertTrue((self.tmp / 'out' / 'ssa_mean.csv').exists())

    def test_ssa_requires_volume_scale(self):
        data = dict(BIRTH_DEATH, simulation={'t_end': 10, 'ssa': True})
        with self.assertRaises(CommandError):
            self.run_command('simulate', self.write_scenario(data))


class CompileDsdCommandTests(CommandTestCase):

    def test_death_process_circuit(self):
        self.run_command('compile-dsd', SCENARIOS / 'dsd_transient.json',
                         overrides=['simulation.t_end=3000', 'simulation.samples=301'])
        out = self.tmp / 'out'
        for name in ('dsd_network.json', 'comparison.csv', 'dsd_trajectory.csv', 'gate_depletion.csv',
                     'gate_report.txt', 'summary.json'):
            self.assertTrue((out / name).exists(), name)
        dsd = self.summary()['dsd']
        self.assertEqual(dsd['expanded_reactions'], 10)
        self.assertEqual(dsd['complexes'], 8)
        self.assertAlmostEqual(dsd['calibration']['reference'], 3e-8, places=15)
        self.assertIsNone(dsd['comparison']['divergence_time'])
        self.assertIn('Translators:', (out / 'gate_report.txt').read_text(encoding='utf-8'))

    def test_adaptation_with_generous_gate_supply(self):
        self.run_command('compile-dsd', SCENARIOS / 'dsd_adaptation.json')
        dsd = self.summary()['dsd']
        self.assertIsNone(dsd['comparison']['divergence_time'])
        for name in ('x', 'v'):
            self.assertLess(dsd['comparison']['max_abs_deviation'][name], 0.05)
        self.assertIsNone(dsd['depletion']['earliest'])

    def test_deviation_grows_as_gate_supply_shrinks(self):
        self.run_command('compile-dsd', SCENARIOS / 'dsd_gate_depletion.json', output='omega_1500')
        scarce = self.summary('omega_1500')['dsd']
        self.assertIsNotNone(scarce['comparison']['divergence_time'])
        self.assertIsNotNone(scarce['depletion']['earliest'])
        self.assertIn('First gate below threshold: t=',
                      (self.tmp / 'omega_1500' / 'gate_report.txt').read_text(encoding='utf-8'))

        worst = [max(scarce['comparison']['max_abs_deviation'].values())]
        for omega in (5000, 10000):
            output = f'omega_{omega}'
            self.run_command('compile-dsd', SCENARIOS / 'dsd_random_profile.json', output=output,
                             overrides=[f'dsd.omega={omega}'])
            worst.append(max(self.summary(output)['dsd']['comparison']['max_abs_deviation'].values()))
        self.assertGreaterEqual(worst[0], worst[1])
        self.assertGreaterEqual(worst[1], worst[2])

    def test_missing_dsd_block(self):
        with self.assertRaises(CommandError):
            self.run_command('compile-dsd', self.write_scenario(BIRTH_DEATH))


class SweepCommandTests(CommandTestCase):

    def test_grid(self):
        self.run_command('sweep', self.write_scenario(BIRTH_DEATH))
        frame = pd.read_csv(self.tmp / 'out' / 'sweep.csv')
        self.assertEqual(len(frame), 2)
        self.assertEqual(sorted(frame['controller.k'].tolist()), [1.0, 2.0])
        self.assertTrue(frame['adapted'].all())

    def test_stationary_power_decreases_with_gain(self):
        data = {
            'name': 'gene_gain_sweep',
            'network': {'builtin': 'gene_expression'},
            'controller': {'mu': 2.0, 'alpha': 0.081, 'k': 10.0},
            'simulation': {'t_end': 200, 'samples': 201},
            'sweep': {'parameters': {'controller.k': [1.0, 10.0, 100.0]}},
        }
        self.run_command('sweep', self.write_scenario(data))
        frame = pd.read_csv(self.tmp / 'out' / 'sweep.csv').sort_values('controller.k')
        power = frame['stationary_power'].to_numpy()
        self.assertTrue(all(power[:-1] > power[1:]))
        plant = Scenario.from_dict(data).build_plant()
        floor = 2.0 / linearize(plant, plant.initial_state()).static_gain
        self.assertTrue(all(power > floor))
        self.assertAlmostEqual(frame['alpha_bar'].min(), frame['alpha_bar'].max(), places=10)

    def test_workers_fall_back_to_settings(self):
        scenario = Scenario.from_dict(BIRTH_DEATH)
        with override_settings(CRN_CONTROL=dict(settings.CRN_CONTROL, SWEEP_WORKERS=3)):
            self.assertEqual(sweep_workers(scenario), 3)
            self.assertEqual(sweep_workers(scenario, 2), 2)
        with_block = Scenario.from_dict(dict(BIRTH_DEATH, sweep=dict(BIRTH_DEATH['sweep'], workers=4)))
        self.assertEqual(sweep_workers(with_block), 4)


class CommandErrorTests(CommandTestCase):

    def test_unknown_key(self):
        data = dict(BIRTH_DEATH, controller={'mu': 2.0, 'alpha': 1.0, 'k': 1.0, 'gain': 2.0})
        with self.assertRaises(CommandError) as ctx:
            self.run_command('analyze', self.write_scenario(data))
        self.assertIn('gain', str(ctx.exception))

    def test_bad_workers(self):
        with self.assertRaises(CommandError):
            self.run_command('sweep', self.write_scenario(BIRTH_DEATH), workers=0)

    def test_list_networks(self):
        stdout = StringIO()
        call_command('list_networks', stdout=stdout)
        output = stdout.getvalue()
        self.assertIn('gene_expression', output)
        self.assertIn('k_p: m -> m + p', output)

    def test_list_unknown_network(self):
        with self.assertRaises(CommandError):
            call_command('list_networks', 'no_such_network', stdout=StringIO())


class RunRegistryTests(CommandTestCase):
    """Recorded runs keep their status, summary and artifacts."""

    def test_recorded_run(self):
        self.run_command('simulate', self.write_scenario(BIRTH_DEATH), record=True)
        run = ScenarioRun.objects.get()
        self.assertEqual(run.status, 'completed')
        self.assertEqual(run.command, 'simulate')
        self.assertIsNotNone(run.finished_at)
        self.assertIn('tracking', run.summary)
        kinds = set(run.artifacts.values_list('kind', flat=True))
        self.assertTrue({'trajectory', 'summary'} <= kinds)

    def test_failed_run(self):
        scenario = Scenario.from_dict(BIRTH_DEATH)
        run = ScenarioRun.objects.create(scenario_name=scenario.name, scenario_path='inline', command='compile-dsd')
        with self.assertRaises(ScenarioError):
            execute_scenario_run(run, scenario, self.tmp / 'out')
        run.refresh_from_db()
        self.assertEqual(run.status, 'failed')
        self.assertIn('dsd', run.error_message)
        self.assertEqual(RunArtifact.objects.count(), 0)

    def test_defaults(self):
        run = ScenarioRun.objects.create(scenario_name='gene_tracking', scenario_path='scenarios/gene_tracking.json',
                                         command='analyze')
        self.assertEqual(run.status, 'pending')
        self.assertEqual(run.overrides, [])
        self.assertEqual(str(run), 'analyze gene_tracking (pending)')
