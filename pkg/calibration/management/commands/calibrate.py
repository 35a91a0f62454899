"""
Identify model parameters from historical fleet data.

Reads historical_stock.csv, historical_emissions.csv and ev_sales_share.csv
from the fixtures directory and writes model_params.json (inline survival and
emission factor tables) plus the per-year mileage series.

Usage:
    python manage.py calibrate
    python manage.py calibrate --fixtures-dir data/france --out-dir out/calibration
    python manage.py calibrate --snapshot 2020 2021
"""

import logging
from pathlib import Path

import pandas as pd
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from fleet.exceptions import BackcastError
from fleet.io import load_model_params, read_table, write_frame, write_json

from calibration.identification import (
    DEFAULT_LOGIT,
    fit_bass,
    mileage_from_emissions,
    model_params_payload,
    survival_from_stocks,
)
from calibration.serializers import (
    EvSalesRowSerializer,
    HistoricalEmissionsRowSerializer,
    HistoricalStockRowSerializer,
)

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Calibrate survival rates, mileage and Bass coefficients from historical data'

    def add_arguments(self, parser):
        parser.add_argument(
            '--fixtures-dir',
            help='Directory holding the historical CSV files',
        )
        parser.add_argument(
            '--out-dir',
            help='Directory for model_params.json and mileage_history.csv',
        )
        parser.add_argument(
            '--snapshot',
            type=int,
            nargs=2,
            default=[2021, 2022],
            metavar=('Y0', 'Y1'),
            help='Consecutive stock snapshots used for survival rates',
        )
        parser.add_argument(
            '--factor-years',
            type=int,
            nargs=2,
            default=[1992, 2050],
            metavar=('FIRST', 'LAST'),
            help='Model years of the emission factor table written out',
        )

    def handle(self, *args, **options):
        fixtures_dir = Path(options.get('fixtures_dir') or settings.BACKCAST['FIXTURES_DIR'])
        out_dir = Path(options.get('out_dir') or settings.BACKCAST['OUT_DIR']) / 'calibration'
        try:
            self.calibrate(fixtures_dir, out_dir, *options['snapshot'], options['factor_years'])
        except BackcastError as exc:
            logger.error('calibrate failed: %s', exc)
            raise CommandError(str(exc), returncode=exc.exit_code)

    def calibrate(self, fixtures_dir, out_dir, y0, y1, factor_years):
        self.stdout.write(f'Calibrating from {fixtures_dir}...')
        stocks = read_table(fixtures_dir / 'historical_stock.csv', HistoricalStockRowSerializer)
        emissions = read_table(fixtures_dir / 'historical_emissions.csv', HistoricalEmissionsRowSerializer)
        sales = read_table(fixtures_dir / 'ev_sales_share.csv', EvSalesRowSerializer).sort_values('year')

        survival = survival_from_stocks(stocks, y0, y1)
        self.stdout.write(self.style.SUCCESS(
            f'  ✓ Survival over {survival.size} age classes, {survival.min():.4f} to {survival.max():.4f}'
        ))

        mileage, mean_mileage = mileage_from_emissions(stocks, emissions)
        self.stdout.write(self.style.SUCCESS(
            f'  ✓ Mileage {mileage.index[0]}-{mileage.index[-1]}: mean {mean_mileage:.6g} km'
        ))

        bass = fit_bass(sales['value'].to_numpy())
        self.stdout.write(self.style.SUCCESS(
            f'  ✓ Bass p={bass.p:.6g} q={bass.q:.6g} (residual {bass.residual:.3e})'
        ))

        payload = model_params_payload(survival, bass, self.logit_weights(fixtures_dir), mean_mileage, factor_years)
        files = [
            write_json(payload, out_dir / 'model_params.json'),
            write_frame(
                pd.DataFrame({'year': mileage.index, 'value': mileage.to_numpy()}),
                out_dir / 'mileage_history.csv',
            ),
        ]
        for path in files:
            self.stdout.write(self.style.SUCCESS(f'  ✓ Wrote {path}'))
        self.stdout.write(self.style.SUCCESS('Calibration completed.'))

    def logit_weights(self, fixtures_dir):
        """Logit weights of the existing parameter file, else the literature values."""
        path = fixtures_dir / 'model_params.json'
        if not path.is_file():
            self.stdout.write(self.style.WARNING('  ! No model_params.json; using default logit weights'))
            return DEFAULT_LOGIT
        params = load_model_params(path)
        return {
            'purchase': params.p_purchase,
            'operating': params.p_operating,
            'infrastructure': params.p_infrastructure,
            'scale': params.scale,
        }
