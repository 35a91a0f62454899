import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from calibration.identification import (
    HISTORICAL_EMISSION_FACTORS,
    QUADRATIC_FROM,
    BassFit,
    bass_residual,
    emission_factor_new,
    emission_factor_series,
    fit_bass,
    mileage_from_emissions,
    model_params_payload,
    survival_from_stocks,
)
from fleet.choice import bass_curve
from fleet.exceptions import CalibrationError, YearOutOfRangeError
from fleet.io import load_survival, read_table
from fleet.tests.helpers import FIXTURES_DIR

from calibration.serializers import (
    EvSalesRowSerializer,
    HistoricalEmissionsRowSerializer,
    HistoricalStockRowSerializer,
)


def stock_frame(snapshots, vehicle_type='thermal'):
    """{year: counts by age} as a historical_stock table, split evenly between ownerships."""
    rows = []
    for year, counts in snapshots.items():
        for age, count in enumerate(counts):
            for ownership in ('private', 'professional'):
                rows.append({
                    'year': year, 'type': vehicle_type, 'ownership': ownership,
                    'age': age, 'count': count / 2,
                })
    return pd.DataFrame(rows)


def historical(name, serializer):
    return read_table(FIXTURES_DIR / name, serializer)


class SurvivalTests(SimpleTestCase):

    def test_shifted_cohorts_survive(self):
        stocks = stock_frame({2000: [100, 80, 60, 40], 2001: [90, 100, 80, 60]})
        survival = survival_from_stocks(stocks, 2000, 2001)
        self.assertEqual(list(survival.index), [1, 2, 3])
        np.testing.assert_allclose(survival.to_numpy(), 1.0)

    def test_halved_cohorts(self):
        stocks = stock_frame({2000: [100, 80, 60, 40], 2001: [90, 50, 40, 30]})
        np.testing.assert_allclose(survival_from_stocks(stocks, 2000, 2001).to_numpy(), 0.5)

    def test_both_types_pooled(self):
        stocks = pd.concat([
            stock_frame({2000: [100, 100], 2001: [0, 90]}),
            stock_frame({2000: [100, 100], 2001: [0, 70]}, 'electric'),
        ])
        self.assertAlmostEqual(survival_from_stocks(stocks, 2000, 2001).loc[1], 0.8)

    def test_growth_is_capped_at_one(self):
        stocks = stock_frame({2000: [100, 80], 2001: [90, 120]})
        with self.assertLogs('calibration.identification', level='INFO'):
            survival = survival_from_stocks(stocks, 2000, 2001)
        self.assertEqual(survival.loc[1], 1.0)

    def test_empty_previous_cohort_is_left_out(self):
        stocks = stock_frame({2000: [0, 80, 60], 2001: [90, 10, 40]})
        with self.assertLogs('calibration.identification', level='WARNING') as logs:
            survival = survival_from_stocks(stocks, 2000, 2001)
        self.assertIn('age(s) 1', logs.output[0])
        self.assertEqual(list(survival.index), [2])
        self.assertAlmostEqual(survival.loc[2], 0.5)

    def test_synthetic_rates_are_recovered(self):
        rates = np.array([0.98, 0.95, 0.9, 0.8])
        before = np.array([1000.0, 900.0, 850.0, 700.0, 500.0])
        after = np.concatenate([[1100.0], rates * before[:-1]])
        survival = survival_from_stocks(stock_frame({2010: before, 2011: after}), 2010, 2011)
        np.testing.assert_allclose(survival.to_numpy(), rates, rtol=1e-12)

    def test_fixture_snapshots_reproduce_survival_table(self):
        stocks = historical('historical_stock.csv', HistoricalStockRowSerializer)
        survival = survival_from_stocks(stocks, 2021, 2022)
        self.assertEqual(survival.size, 30)
        np.testing.assert_allclose(survival.to_numpy(), load_survival(FIXTURES_DIR / 'survival.csv'), rtol=1e-5)

    def test_years_must_be_consecutive(self):
        stocks = stock_frame({2000: [1, 1], 2002: [1, 1]})
        with self.assertRaisesMessage(CalibrationError, 'consecutive'):
            survival_from_stocks(stocks, 2000, 2002)

    def test_missing_snapshot(self):
        stocks = stock_frame({2000: [1, 1]})
        with self.assertRaisesMessage(CalibrationError, 'no stock snapshot for 2001'):
            survival_from_stocks(stocks, 2000, 2001)


class EmissionFactorTests(SimpleTestCase):

    def test_quadratic_projection(self):
        self.assertAlmostEqual(emission_factor_new(2020), 108.2)
        self.assertAlmostEqual(emission_factor_new(2030), 96.5)
        self.assertAlmostEqual(emission_factor_new(2050), 79.1)

    def test_records_before_projection(self):
        self.assertEqual(emission_factor_new(2010), 130.0)
        self.assertEqual(emission_factor_new(1995), 176.0)
        self.assertEqual(emission_factor_new(1993), 176.0)

    def test_projection_continues_records(self):
        self.assertLess(abs(HISTORICAL_EMISSION_FACTORS[QUADRATIC_FROM] - emission_factor_new(QUADRATIC_FROM)), 0.5)

    def test_beyond_projection(self):
        with self.assertRaises(YearOutOfRangeError):
            emission_factor_new(2051)

    def test_series(self):
        years, factors = emission_factor_series(2018, 2022)
        np.testing.assert_array_equal(years, [2018, 2019, 2020, 2021, 2022])
        self.assertEqual(factors[0], 114.0)
        self.assertTrue(np.all(np.diff(factors[2:]) < 0))


class MileageTests(SimpleTestCase):

    def test_synthetic_inversion(self):
        stocks = stock_frame({2015: [400, 300, 300]})
        # 1000 vehicles at 100 g/km over 10 000 km
        emissions = pd.DataFrame({'year': [2015], 'thermal': [1e-3], 'electric': [0.0]})
        mileage, mean = mileage_from_emissions(stocks, emissions, factor=lambda year: 100.0)
        self.assertAlmostEqual(mileage.loc[2015], 10000.0)
        self.assertAlmostEqual(mean, 10000.0)

    def test_electric_stock_is_ignored(self):
        stocks = pd.concat([
            stock_frame({2015: [1000]}),
            stock_frame({2015: [5000]}, 'electric'),
        ])
        emissions = pd.DataFrame({'year': [2015], 'thermal': [1e-3], 'electric': [0.0]})
        _, mean = mileage_from_emissions(stocks, emissions, factor=lambda year: 100.0)
        self.assertAlmostEqual(mean, 10000.0)

    def test_fixture_history(self):
        stocks = historical('historical_stock.csv', HistoricalStockRowSerializer)
        emissions = historical('historical_emissions.csv', HistoricalEmissionsRowSerializer)
        mileage, mean = mileage_from_emissions(stocks, emissions)
        self.assertEqual(list(mileage.index), list(range(2011, 2023)))
        self.assertAlmostEqual(mileage.loc[2020], 11309.0, delta=1.0)
        self.assertAlmostEqual(mileage.loc[2022], 13550.0, delta=1.0)
        self.assertAlmostEqual(mean, 13500.0, delta=0.03 * 13500.0)

    def test_no_common_year(self):
        stocks = stock_frame({2015: [1000]})
        emissions = pd.DataFrame({'year': [2016], 'thermal': [1.0], 'electric': [0.0]})
        with self.assertRaises(CalibrationError):
            mileage_from_emissions(stocks, emissions)

    def test_no_thermal_stock(self):
        stocks = stock_frame({2015: [1000]}, 'electric')
        emissions = pd.DataFrame({'year': [2015], 'thermal': [1.0], 'electric': [0.0]})
        with self.assertRaisesMessage(CalibrationError, '2015'):
            mileage_from_emissions(stocks, emissions)


class BassFitTests(SimpleTestCase):

    def test_recovers_synthetic_coefficients(self):
        fit = fit_bass(bass_curve(0.02, 0.4, 10))
        self.assertAlmostEqual(fit.p, 0.02, delta=1e-3)
        self.assertAlmostEqual(fit.q, 0.4, delta=1e-3)
        self.assertLess(fit.residual, 1e-10)

    def test_off_grid_coefficients(self):
        fit = fit_bass(bass_curve(0.013, 0.57, 12))
        self.assertAlmostEqual(fit.p, 0.013, delta=1e-3)
        self.assertAlmostEqual(fit.q, 0.57, delta=1e-3)

    def test_observed_shares(self):
        shares = historical('ev_sales_share.csv', EvSalesRowSerializer).sort_values('year')['value'].to_numpy()
        fit = fit_bass(shares)
        self.assertLessEqual(fit.residual, bass_residual(0.02, 0.4, shares) + 1e-15)
        for dp, dq in ((0.2, 0.0), (-0.2, 0.0), (0.0, 0.2), (0.0, -0.2)):
            with self.subTest(dp=dp, dq=dq):
                self.assertLessEqual(fit.residual, bass_residual(fit.p * (1 + dp), fit.q * (1 + dq), shares))

    def test_no_adoption(self):
        fit = fit_bass(np.zeros(6))
        self.assertLess(fit.p, 1e-6)
        self.assertLess(fit.residual, 1e-12)

    def test_too_few_observations(self):
        with self.assertRaisesMessage(CalibrationError, 'at least 3'):
            fit_bass([0.01, 0.02])

    def test_non_finite_share(self):
        with self.assertRaises(CalibrationError):
            fit_bass([0.01, float('nan'), 0.03])


class PayloadTests(SimpleTestCase):

    def test_inline_tables(self):
        survival = pd.Series([1.0, 0.9, 0.8], index=[1, 2, 3])
        payload = model_params_payload(
            survival, BassFit(0.015, 0.6, 0.0), {'purchase': -0.3}, 13230.6, (2019, 2021),
        )
        self.assertEqual(payload['schema_version'], 1)
        self.assertEqual(payload['survival'], [1.0, 0.9, 0.8])
        factors = payload['emission_factor_new']
        self.assertEqual(list(factors), ['2019', '2020', '2021'])
        self.assertEqual(factors['2019'], 115.0)
        self.assertAlmostEqual(factors['2021'], 106.94)
        self.assertEqual(payload['bass'], {'p': 0.015, 'q': 0.6})
        self.assertEqual(payload['mileage_km'], 13230.6)

    def test_gap_in_survival_ages(self):
        survival = pd.Series([1.0, 0.8], index=[1, 3])
        with self.assertRaisesMessage(CalibrationError, '[2]'):
            model_params_payload(survival, BassFit(0.0, 0.0, 0.0), {}, 1.0, (2019, 2020))
