"""
List the registered plant networks with their nominal reactions.
"""
from django.core.management.base import BaseCommand, CommandError

from core_engine.crn.network import reaction_table
from core_engine.registry import NetworkRegistry


class Command(BaseCommand):
    help = 'List registered plant networks'

    def add_arguments(self, parser):
        parser.add_argument(
            'names',
            nargs='*',
            help='Restrict the listing to these networks'
        )

    def handle(self, *args, **options):
        builders = NetworkRegistry.list_all()
        names = options['names'] or sorted(builders)
        unknown = [name for name in names if name not in builders]
        if unknown:
            raise CommandError(f"Unknown network(s): {', '.join(unknown)}")

        for name in names:
            network = NetworkRegistry.build(name)
            self.stdout.write(self.style.SUCCESS(f'• {name}'))
            self.stdout.write(f"  species: {', '.join(network.species_names)} "
                              f"(controlled {network.controlled}, actuated {network.actuated})")
            for line in reaction_table(network):
                self.stdout.write(f"  {line}")

        self.stdout.write(self.style.SUCCESS(f'\n{len(names)} network(s)'))
