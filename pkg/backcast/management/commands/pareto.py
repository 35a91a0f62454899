"""
Sweep emission targets and write the cost/emissions Pareto frontier.

Usage:
    python manage.py pareto                            # settings.BACKCAST targets
    python manage.py pareto --targets 0.96 0.91 0.87 --workers 3
    python manage.py pareto --target-gt 0.87 0.82
"""

from django.conf import settings

from backcast.management.base import BackcastCommand
from backcast.scenarios import ScenarioSpec, run_scenario


class Command(BackcastCommand):
    help = 'Solve one backcast per target and write the Pareto frontier'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--targets', '--target-gt',
            dest='targets',
            type=float,
            nargs='+',
            help='Caps on cumulative emissions, in Gt CO2',
        )

    def run(self, cfg, **options):
        targets = options.get('targets') or settings.BACKCAST['PARETO_TARGETS_GT']
        self.stdout.write(f'Solving {len(targets)} target(s) with {cfg.workers} worker(s)...')
        outcome = run_scenario(ScenarioSpec('pareto', targets_gt=tuple(targets)), cfg)

        self.stdout.write(f"{'Target Gt':<12} {'ℰ(T) Gt':<12} {'I(T) G€':<12} {'ν €/t':<12} Status")
        self.stdout.write('-' * 62)
        for point in outcome.frontier:
            values = [
                f'{value:.6g}' if value is not None else '-'
                for value in (point.target_gt, point.cum_emissions_gt, point.budget_geur, point.nu)
            ]
            line = f'{values[0]:<12} {values[1]:<12} {values[2]:<12} {values[3]:<12} {point.status}'
            style = self.style.SUCCESS if point.solved else self.style.WARNING
            self.stdout.write(style(line))

        self.write_files(outcome.files)
        if not outcome.summary['monotone']:
            self.stdout.write(self.style.WARNING('Frontier is not strictly monotone.'))
        self.stdout.write(self.style.SUCCESS(
            f"Pareto sweep completed: {outcome.summary['solved']}/{outcome.summary['points']} solved."
        ))
