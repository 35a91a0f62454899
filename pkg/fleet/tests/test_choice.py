import math

import numpy as np
from django.test import SimpleTestCase

from fleet.choice import (
    bass_adoption,
    bass_curve,
    choice_share_thermal,
    logit_factor_table,
    logit_factors,
    thermal_share,
    thermal_share_slope,
    utility,
)
from fleet.types import VehicleType

from .helpers import france, toy_exo, toy_params


class LogitShareTests(SimpleTestCase):

    def setUp(self):
        self.exo = toy_exo(2000, 2004)
        self.params = toy_params()

    def test_share_matches_utilities(self):
        for incentive in (0.0, 2000.0, 15000.0):
            u1 = utility(VehicleType.THERMAL, 2002, incentive, self.exo, self.params)
            u2 = utility(VehicleType.ELECTRIC, 2002, incentive, self.exo, self.params)
            expected = 1.0 / (1.0 + math.exp(self.params.scale * (u2 - u1)))
            self.assertAlmostEqual(choice_share_thermal(2002, incentive, self.exo, self.params), expected, places=12)

    def test_incentive_only_changes_electric_utility(self):
        before = utility(VehicleType.THERMAL, 2001, 0.0, self.exo, self.params)
        after = utility(VehicleType.THERMAL, 2001, 9000.0, self.exo, self.params)
        self.assertEqual(before, after)

    def test_share_decreases_with_incentive(self):
        factors = logit_factors(2003, self.exo, self.params)
        self.assertGreater(factors.log_r, 0.0)
        shares = thermal_share(factors, np.linspace(0.0, 35000.0, 50))
        self.assertTrue(np.all(np.diff(shares) < 0))
        self.assertTrue(np.all((shares > 0) & (shares < 1)))

    def test_slope_matches_finite_difference(self):
        factors = logit_factors(2003, self.exo, self.params)
        u, h = 7000.0, 1e-2
        numeric = (thermal_share(factors, u + h) - thermal_share(factors, u - h)) / (2 * h)
        analytic = thermal_share_slope(thermal_share(factors, u), factors.log_r)
        self.assertAlmostEqual(float(analytic), float(numeric), delta=1e-6 * abs(float(numeric)))

    def test_factor_table_matches_single_years(self):
        table = logit_factor_table([2001, 2002, 2003], self.exo, self.params)
        single = logit_factors(2002, self.exo, self.params)
        self.assertAlmostEqual(float(table.log_p[1]), single.log_p)
        self.assertAlmostEqual(float(table.log_q[1]), single.log_q)
        self.assertAlmostEqual(float(table.log_r[1]), single.log_r)

    def test_france_constant_incentive_share_2023(self):
        _, exo, params = france()
        electric = 1.0 - choice_share_thermal(2023, 5000.0, exo, params)
        self.assertAlmostEqual(electric, 0.2302, delta=5e-4)

    def test_symmetric_vehicles_split_evenly(self):
        exo = toy_exo(
            2000, 2002, purchase=(30000.0, 30000.0), operating=(1000.0, 1000.0), infrastructure=1.0, adoption=0.0,
        )
        u1 = utility(VehicleType.THERMAL, 2001, 0.0, exo, self.params)
        u2 = utility(VehicleType.ELECTRIC, 2001, 0.0, exo, self.params)
        self.assertAlmostEqual(u1, u2, places=12)
        self.assertAlmostEqual(u1, -0.45, places=12)
        self.assertAlmostEqual(choice_share_thermal(2001, 0.0, exo, self.params), 0.5, places=12)

    def test_france_utilities_2022(self):
        _, exo, params = france()
        mean_purchase = (27800.0 + 32440.0) / 2
        mean_operating = (556.0 + 648.8) / 2
        thermal = -0.3 * 27800.0 / mean_purchase - 0.15 * 556.0 / mean_operating
        electric = (1.0 - 0.06369) * (
            -0.3 * 32440.0 / mean_purchase - 0.15 * 648.8 / mean_operating - 0.3 * (1.0 - 0.2)
        )
        self.assertAlmostEqual(utility(VehicleType.THERMAL, 2022, 0.0, exo, params), thermal, places=12)
        self.assertAlmostEqual(utility(VehicleType.ELECTRIC, 2022, 0.0, exo, params), electric, places=12)
        self.assertAlmostEqual(thermal, -0.41534, places=5)
        self.assertAlmostEqual(electric, -0.67851, places=5)
        expected = 1.0 / (1.0 + math.exp(6.75 * (electric - thermal)))
        self.assertAlmostEqual(choice_share_thermal(2022, 0.0, exo, params), expected, places=12)


class BassTests(SimpleTestCase):

    def test_first_rate_is_innovation_coefficient(self):
        rates = bass_curve(0.02, 0.4, 10)
        self.assertEqual(rates[0], 0.02)
        self.assertAlmostEqual(rates[1], (0.02 + 0.4 * 0.02) * 0.98)

    def test_fifth_year_rate(self):
        self.assertAlmostEqual(bass_curve(0.02, 0.4, 5)[4], 0.06369, delta=1e-5)

    def test_adoption_stays_bounded(self):
        rates = bass_curve(0.05, 0.9, 60)
        self.assertTrue(np.all(rates >= 0))
        self.assertLessEqual(rates.sum(), 1.0 + 1e-12)

    def test_zero_innovation_never_starts(self):
        np.testing.assert_array_equal(bass_curve(0.0, 0.5, 8), np.zeros(8))

    def test_adoption_uses_model_coefficients(self):
        params = toy_params(bass_p=0.03, bass_q=0.3)
        np.testing.assert_array_equal(bass_adoption(params, range(2018, 2023)), bass_curve(0.03, 0.3, 5))
