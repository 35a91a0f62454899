"""
Run a reference scenario over the configured horizon.

Usage:
    python manage.py simulate                          # I0, no incentive
    python manage.py simulate --scenario IC --amount 5000
    python manage.py simulate --scenario IP            # incentive = EV price
    python manage.py simulate --scenario BI            # thermal sales banned
"""

from backcast.management.base import BackcastCommand
from backcast.scenarios import REFERENCE_KINDS, ScenarioSpec, run_scenario


class Command(BackcastCommand):
    help = 'Simulate the fleet under a reference incentive policy'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--scenario',
            choices=REFERENCE_KINDS,
            default='I0',
            help='Reference scenario (default I0)',
        )
        parser.add_argument(
            '--amount',
            type=float,
            help='Constant incentive of the IC scenario, in € per EV',
        )

    def run(self, cfg, **options):
        amount = options.get('amount')
        if amount is None:
            amount = cfg.ic_amount
        kind = options['scenario']
        self.stdout.write(f'Simulating {kind} from {cfg.start_year} to {cfg.end_year}...')
        outcome = run_scenario(ScenarioSpec(kind, amount=amount), cfg)
        self.write_summary(outcome.summary)
        self.write_files(outcome.files)
        self.stdout.write(self.style.SUCCESS(f'{kind} completed.'))
