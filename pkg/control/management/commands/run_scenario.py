"""
Management command to run a scenario: analyze, simulate, compile-dsd or sweep.
"""
from django.core.management.base import BaseCommand, CommandError

from control.models import ScenarioRun
from control.scenario import load_scenario
from control.services import COMMANDS, execute_scenario_run, run_scenario


class Command(BaseCommand):
    help = 'Run a scenario file (analyze | simulate | compile-dsd | sweep)'

    def add_arguments(self, parser):
        parser.add_argument(
            'command',
            choices=COMMANDS,
            help='What to do with the scenario'
        )
        parser.add_argument(
            'scenario',
            type=str,
            help='Path to the scenario JSON file'
        )
        parser.add_argument(
            '--set',
            dest='overrides',
            action='append',
            default=[],
            metavar='PATH=VALUE',
            help='Override a scenario key, e.g. --set controller.alpha=0.45 (repeatable)'
        )
        parser.add_argument(
            '--output-dir',
            type=str,
            default=None,
            help='Directory for artifacts (default: outputs.directory or CRN_CONTROL OUTPUT_DIR/<name>)'
        )
        parser.add_argument(
            '--workers',
            type=int,
            default=None,
            help='Parallel workers for sweeps'
        )
        parser.add_argument(
            '--record',
            action='store_true',
            help='Record the run and its artifacts in the database'
        )

    def handle(self, *args, **options):
        command = options['command']
        overrides = options['overrides']
        workers = options.get('workers')
        if workers is not None and workers < 1:
            raise CommandError('--workers must be >= 1')

        try:
            scenario = load_scenario(options['scenario'], overrides)
        except ValueError as e:
            raise CommandError(f'Invalid scenario: {e}')

        self.stdout.write(f"Scenario: {scenario.name}")
        if scenario.description:
            self.stdout.write(f"  {scenario.description}")

        run = None
        if options['record']:
            run = ScenarioRun.objects.create(
                scenario_name=scenario.name,
                scenario_path=str(options['scenario']),
                command=command,
                overrides=overrides,
            )

        try:
            if run is not None:
                report = execute_scenario_run(run, scenario, options.get('output_dir'), workers)
            else:
                report = run_scenario(command, scenario, options.get('output_dir'), workers)
        except (ValueError, RuntimeError) as e:
            self.stdout.write(self.style.ERROR(f"{command} failed: {e}"))
            raise CommandError(str(e))

        self.stdout.write(str(report))
        suffix = f" (run #{run.id})" if run is not None else ''
        self.stdout.write(self.style.SUCCESS(f"\n{command} completed successfully{suffix}"))
