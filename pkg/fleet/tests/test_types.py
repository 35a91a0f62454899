import numpy as np
from django.test import SimpleTestCase

from fleet.exceptions import DataError, PolicyBoundsError, YearOutOfRangeError
from fleet.types import ELECTRIC, THERMAL, FleetState, PolicyTrajectory, VehicleType

from .helpers import toy_exo, toy_params


class VehicleTypeTests(SimpleTestCase):

    def test_rows_and_labels(self):
        self.assertEqual(VehicleType.THERMAL.index, THERMAL)
        self.assertEqual(VehicleType.ELECTRIC.index, ELECTRIC)
        self.assertIs(VehicleType.from_label('electric'), VehicleType.ELECTRIC)
        self.assertEqual(VehicleType.THERMAL.label, 'thermal')


class ModelParamsTests(SimpleTestCase):

    def test_rejects_survival_outside_unit_interval(self):
        with self.assertRaises(DataError):
            toy_params(survival=(0.9, 1.2))
        with self.assertRaises(DataError):
            toy_params(survival=(0.0,))

    def test_rejects_positive_logit_weight(self):
        with self.assertRaises(DataError):
            toy_params(p_purchase=0.1)

    def test_emission_factor_before_table_takes_earliest_level(self):
        params = toy_params(factor=lambda year: 200.0 - (year - 1980), factor_years=(1980, 2030))
        self.assertEqual(params.emission_factor_new(1970), 200.0)
        self.assertEqual(params.emission_factor_new(1990), 190.0)
        with self.assertRaises(YearOutOfRangeError):
            params.emission_factor_new(2031)

    def test_cohort_emission_factors_follow_model_year(self):
        params = toy_params(factor=lambda year: float(year - 1900), factor_years=(1980, 2030))
        np.testing.assert_array_equal(params.cohort_emission_factors(2010), [110.0, 109.0, 108.0, 107.0])


class FleetStateTests(SimpleTestCase):

    def test_negative_stock_is_rejected(self):
        with self.assertRaises(DataError):
            FleetState(2022, np.array([[1.0, -1.0], [0.0, 0.0]]))

    def test_totals_by_type(self):
        state = FleetState(2022, np.array([[1.0, 2.0], [3.0, 4.0]]))
        self.assertEqual(state.total, 10.0)
        self.assertEqual(state.stock_of(VehicleType.ELECTRIC), 7.0)
        self.assertEqual(state.age_classes, 1)

    def test_stocks_are_read_only(self):
        state = FleetState(2022, np.ones((2, 3)))
        with self.assertRaises(ValueError):
            state.stocks[0, 0] = 5.0


class PolicyTrajectoryTests(SimpleTestCase):

    def setUp(self):
        self.exo = toy_exo(2000, 2004)
        self.years = np.arange(2001, 2005)

    def test_constructors(self):
        np.testing.assert_array_equal(PolicyTrajectory.zero(self.years).values, np.zeros(4))
        self.assertEqual(PolicyTrajectory.constant(self.years, 5000).at(2003), 5000.0)
        np.testing.assert_array_equal(
            PolicyTrajectory.full_price(self.years, self.exo).values, np.full(4, 35000.0),
        )

    def test_at_outside_years(self):
        with self.assertRaises(YearOutOfRangeError):
            PolicyTrajectory.zero(self.years).at(2000)

    def test_check_bounds(self):
        PolicyTrajectory.full_price(self.years, self.exo).check_bounds(self.exo)
        with self.assertRaises(PolicyBoundsError):
            PolicyTrajectory.constant(self.years, -1.0).check_bounds(self.exo)
        with self.assertRaisesMessage(PolicyBoundsError, '2001'):
            PolicyTrajectory.constant(self.years, 40000.0).check_bounds(self.exo)

    def test_years_must_be_contiguous(self):
        with self.assertRaises(DataError):
            PolicyTrajectory(np.array([2001, 2003]), np.zeros(2))


class ExogenousSeriesTests(SimpleTestCase):

    def test_year_inputs(self):
        inputs = toy_exo(2000, 2004, fleet_size=1.0e6, growth=0.0).at(2002)
        self.assertAlmostEqual(inputs.vehicles_required, 1.0e6)
        self.assertEqual(inputs.mean_purchase_cost, 30000.0)
        np.testing.assert_array_equal(inputs.infrastructure, [1.0, 0.6])
        np.testing.assert_array_equal(inputs.adoption, [0.0, 0.1])

    def test_year_out_of_range(self):
        with self.assertRaises(YearOutOfRangeError):
            toy_exo(2000, 2004).at(2005)

    def test_rejects_infrastructure_above_one(self):
        with self.assertRaises(DataError):
            toy_exo(infrastructure=1.5)
