"""
Solve the cost-minimal incentive trajectory for a cap on cumulative emissions.

Usage:
    python manage.py backcast                          # cap = IC reference ℰ(T)
    python manage.py backcast --target-gt 0.87
    python manage.py backcast --target-gt 0.91 --method reduced
"""

from fleet.exceptions import ConvergenceError, InfeasibleTargetError

from backcast.management.base import BackcastCommand
from backcast.scenarios import METHODS, ScenarioSpec, load_inputs, run_scenario, simulate_reference


class Command(BackcastCommand):
    help = 'Backcast the incentive policy meeting a cumulative CO2 target at least cost'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--target-gt',
            type=float,
            help='Cap on cumulative emissions at the end year, in Gt CO2',
        )
        parser.add_argument(
            '--target-scenario',
            choices=['IC'],
            default='IC',
            help='Reference whose ℰ(T) is the cap when --target-gt is absent',
        )
        parser.add_argument(
            '--method',
            choices=METHODS,
            default='full',
            help='full: age-structured adjoint solver; reduced: single-cohort Lambert solution',
        )

    def run(self, cfg, **options):
        inputs = load_inputs(cfg)
        target = options.get('target_gt')
        reference_amount = None
        if target is None:
            reference = simulate_reference(options['target_scenario'], inputs, cfg.ic_amount)
            target = reference.cum_emissions_gt
            reference_amount = cfg.ic_amount
            self.stdout.write(
                f'Target from IC({cfg.ic_amount:.6g} €): {target:.6g} Gt'
            )

        method = options['method']
        self.stdout.write(f'Backcasting {target:.6g} Gt with the {method} model...')
        try:
            outcome = run_scenario(
                ScenarioSpec('optimal', target_gt=target, reference_amount=reference_amount),
                cfg, inputs=inputs, method=method,
            )
        except InfeasibleTargetError as exc:
            low, high = exc.achievable
            self.stdout.write(self.style.ERROR(f'Achievable range: [{low:.6g}, {high:.6g}] Gt'))
            raise

        self.write_summary(outcome.summary)
        self.write_files(outcome.files)
        summary = outcome.summary
        if summary.get('model_mismatch'):
            self.stdout.write(self.style.WARNING(
                f'Reduced-model policy gives {summary["cum_emissions_gt"]:.6g} Gt on the full fleet '
                f'(reduced model: {summary["reduced_cum_emissions_gt"]:.6g} Gt)'
            ))
        if summary.get('converged') is False:
            raise ConvergenceError(
                'inner solve stalled before the gradient tolerance',
                stationarity=summary.get('max_stationarity'),
            )
        self.stdout.write(self.style.SUCCESS('Backcast completed.'))
