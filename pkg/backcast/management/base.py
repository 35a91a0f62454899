"""
Shared plumbing of the backcasting management commands.
"""

import logging

from django.core.management.base import BaseCommand, CommandError

from fleet.exceptions import BackcastError

from ..config import load_run_config

logger = logging.getLogger(__name__)


class BackcastCommand(BaseCommand):
    """
    Adds the run-configuration flags and turns domain errors into
    CommandError with the error's exit code. Subclasses implement run().
    """

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            help='JSON run configuration (schema_version 1)',
        )
        parser.add_argument(
            '--out-dir',
            help='Directory for result CSV and summary files',
        )
        parser.add_argument(
            '--workers',
            type=int,
            help='Worker processes for target sweeps',
        )
        parser.add_argument(
            '--tol-emissions',
            type=float,
            help='Tolerance on cumulative emissions, in Gt',
        )
        parser.add_argument(
            '--tol-grad',
            type=float,
            help='Relative projected-gradient reduction of each inner solve',
        )
        parser.add_argument(
            '--max-outer-iterations',
            type=int,
            help='Inner solves allowed for the multiplier search',
        )
        parser.add_argument(
            '--max-inner-iterations',
            type=int,
            help='Projected-gradient iterations allowed per inner solve',
        )

    def handle(self, *args, **options):
        try:
            cfg = load_run_config(
                options.get('config'),
                out_dir=options.get('out_dir'),
                workers=options.get('workers'),
                tol_emissions_gt=options.get('tol_emissions'),
                tol_grad=options.get('tol_grad'),
                max_outer_iterations=options.get('max_outer_iterations'),
                max_inner_iterations=options.get('max_inner_iterations'),
            )
            self.run(cfg, **options)
        except BackcastError as exc:
            logger.error('%s failed: %s', self.__module__.rsplit('.', 1)[-1], exc)
            raise CommandError(str(exc), returncode=exc.exit_code)

    def run(self, cfg, **options):
        raise NotImplementedError

    def write_summary(self, summary):
        for key, value in summary.items():
            if isinstance(value, float):
                value = f'{value:.6g}'
            self.stdout.write(f'  {key}: {value}')

    def write_files(self, files):
        for path in files:
            self.stdout.write(self.style.SUCCESS(f'  ✓ Wrote {path}'))
