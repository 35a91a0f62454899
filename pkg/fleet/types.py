"""
Domain types for the age-structured passenger-car fleet model.

Stocks are kept as numpy arrays indexed (vehicle type, age class) with the
last age class absorbing. Types are frozen dataclasses holding read-only
arrays so states and results can be shared between threads and pickled to
worker processes.
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
import pandas as pd

from . import units
from .exceptions import DataError, PolicyBoundsError, YearOutOfRangeError


def _frozen(values, dtype=float):
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


class VehicleType(IntEnum):
    """Thermal (v=1) and electric (v=2) cars."""
    THERMAL = 1
    ELECTRIC = 2

    @property
    def index(self):
        """Row of the stock matrix."""
        return self.value - 1

    @property
    def label(self):
        return self.name.lower()

    @classmethod
    def from_label(cls, label):
        return cls[label.upper()]


THERMAL = VehicleType.THERMAL.index
ELECTRIC = VehicleType.ELECTRIC.index


@dataclass(frozen=True)
class YearInputs:
    """Exogenous inputs of one year, per vehicle type (thermal first)."""
    year: int
    demand: float
    mileage: float
    purchase_cost: np.ndarray
    operating_cost: np.ndarray
    infrastructure: np.ndarray
    adoption: np.ndarray

    @property
    def vehicles_required(self):
        """Demand-implied fleet size G(t)/M(t)."""
        return self.demand / self.mileage

    @property
    def mean_purchase_cost(self):
        # Un-incentivized costs; the incentive never enters the normalizer
        return float(self.purchase_cost.mean())

    @property
    def mean_operating_cost(self):
        return float(self.operating_cost.mean())


@dataclass(frozen=True)
class ExogenousSeries:
    """
    Year-indexed exogenous inputs over a contiguous range of years.

    demand is in vehicle-km/y, mileage in km/y, costs in € and €/y.
    infrastructure holds c_2^I (electric); c_1^I is identically 1.
    adoption holds c^A applied to electric cars; c_1^A is identically 0.
    """
    years: np.ndarray
    demand: np.ndarray
    mileage: np.ndarray
    purchase_cost: np.ndarray
    operating_cost: np.ndarray
    infrastructure: np.ndarray
    adoption: np.ndarray

    def __post_init__(self):
        years = _frozen(self.years, dtype=int)
        object.__setattr__(self, 'years', years)
        for name in ('demand', 'mileage', 'infrastructure', 'adoption'):
            values = _frozen(getattr(self, name))
            if values.shape != years.shape:
                raise DataError(f'{name} has {values.size} values for {years.size} years')
            object.__setattr__(self, name, values)
        for name in ('purchase_cost', 'operating_cost'):
            values = _frozen(getattr(self, name))
            if values.shape != (years.size, 2):
                raise DataError(f'{name} must have shape ({years.size}, 2)')
            object.__setattr__(self, name, values)

        if years.size == 0 or np.any(np.diff(years) != 1):
            raise DataError('exogenous series must cover a contiguous range of years')
        if np.any(self.demand <= 0) or np.any(self.mileage <= 0):
            raise DataError('demand and mileage must be positive')
        if np.any(self.purchase_cost <= 0) or np.any(self.operating_cost <= 0):
            raise DataError('costs must be positive')
        if np.any((self.infrastructure < 0) | (self.infrastructure > 1)):
            raise DataError('infrastructure rate must lie in [0, 1]')
        if np.any(self.adoption < 0):
            raise DataError('adoption coefficient must be non-negative')

    @property
    def first_year(self):
        return int(self.years[0])

    @property
    def last_year(self):
        return int(self.years[-1])

    def index(self, year):
        """Row of `year`, raising YearOutOfRangeError outside the range."""
        position = int(year) - self.first_year
        if not 0 <= position < self.years.size:
            raise YearOutOfRangeError(year, self.first_year, self.last_year, 'exogenous series')
        return position

    def rows(self, years):
        """Row indices for a sequence of years."""
        return np.array([self.index(year) for year in years], dtype=int)

    def at(self, year):
        i = self.index(year)
        return YearInputs(
            year=int(year),
            demand=float(self.demand[i]),
            mileage=float(self.mileage[i]),
            purchase_cost=self.purchase_cost[i],
            operating_cost=self.operating_cost[i],
            infrastructure=np.array([1.0, self.infrastructure[i]]),
            adoption=np.array([0.0, self.adoption[i]]),
        )

    def electric_price(self, years):
        """Upper bound C_2^P(t) of the incentive for each year."""
        return self.purchase_cost[self.rows(years), ELECTRIC]


@dataclass(frozen=True)
class ModelParams:
    """
    Structural parameters.

    survival[a-1] is the survival rate η_a into age class a (a = 1..A).
    Emission factors of new thermal cars are tabulated by contiguous model
    year; older model years take the earliest tabulated level.
    """
    survival: np.ndarray
    emission_factor_years: np.ndarray
    emission_factor_values: np.ndarray
    p_purchase: float = -0.3
    p_operating: float = -0.15
    p_infrastructure: float = -0.3
    scale: float = 6.75
    bass_p: float = 0.02
    bass_q: float = 0.4

    def __post_init__(self):
        object.__setattr__(self, 'survival', _frozen(self.survival))
        object.__setattr__(self, 'emission_factor_years', _frozen(self.emission_factor_years, dtype=int))
        object.__setattr__(self, 'emission_factor_values', _frozen(self.emission_factor_values))

        if self.survival.size == 0:
            raise DataError('at least one survival rate is required')
        if np.any((self.survival <= 0) | (self.survival > 1)):
            raise DataError('survival rates must lie in (0, 1]')
        if self.emission_factor_years.shape != self.emission_factor_values.shape:
            raise DataError('emission factor years and values differ in length')
        if self.emission_factor_years.size == 0 or np.any(np.diff(self.emission_factor_years) != 1):
            raise DataError('emission factors must cover contiguous model years')
        if np.any(self.emission_factor_values < 0):
            raise DataError('emission factors must be non-negative')
        if self.scale <= 0:
            raise DataError('logit scale must be positive')
        if max(self.p_purchase, self.p_operating, self.p_infrastructure) > 0:
            raise DataError('logit weights must be non-positive')
        if self.bass_p < 0 or self.bass_q < 0:
            raise DataError('Bass coefficients must be non-negative')

    @property
    def age_classes(self):
        """A, the index of the absorbing age class."""
        return int(self.survival.size)

    def emission_factor_new(self, model_year):
        """ε_10 of a model year in g/km."""
        first = int(self.emission_factor_years[0])
        last = int(self.emission_factor_years[-1])
        if model_year > last:
            raise YearOutOfRangeError(model_year, first, last, 'emission factors')
        return float(self.emission_factor_values[max(int(model_year) - first, 0)])

    def cohort_emission_factors(self, year):
        """ε_1a(t) = ε_10(t - a) for a = 0..A."""
        first = int(self.emission_factor_years[0])
        last = int(self.emission_factor_years[-1])
        if year > last:
            raise YearOutOfRangeError(year, first, last, 'emission factors')
        model_years = year - np.arange(self.age_classes + 1)
        return self.emission_factor_values[np.clip(model_years - first, 0, None)]


@dataclass(frozen=True)
class FleetState:
    """
    Stock S_va(t) in vehicles with shape (2, A+1) and cumulative
    emissions ℰ(t) in tonnes CO2.
    """
    year: int
    stocks: np.ndarray
    cum_emissions: float = 0.0

    def __post_init__(self):
        stocks = _frozen(self.stocks)
        if stocks.ndim != 2 or stocks.shape[0] != 2:
            raise DataError('stocks must have shape (2, A+1)')
        if np.any(stocks < 0):
            raise DataError(f'negative stock in {self.year}')
        object.__setattr__(self, 'stocks', stocks)

    @property
    def age_classes(self):
        return self.stocks.shape[1] - 1

    @property
    def total(self):
        return float(self.stocks.sum())

    def stock_of(self, vehicle_type):
        return float(self.stocks[VehicleType(vehicle_type).index].sum())


@dataclass(frozen=True)
class PolicyTrajectory:
    """Incentive u(t) in € per EV purchased, for t = t0+1..T."""
    years: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'years', _frozen(self.years, dtype=int))
        object.__setattr__(self, 'values', _frozen(self.values))
        if self.years.shape != self.values.shape:
            raise DataError('policy years and values differ in length')
        if self.years.size and np.any(np.diff(self.years) != 1):
            raise DataError('policy years must be contiguous')

    @classmethod
    def zero(cls, years):
        years = np.asarray(years, dtype=int)
        return cls(years, np.zeros(years.size))

    @classmethod
    def constant(cls, years, amount):
        years = np.asarray(years, dtype=int)
        return cls(years, np.full(years.size, float(amount)))

    @classmethod
    def full_price(cls, years, exo):
        return cls(years, exo.electric_price(years))

    @property
    def first_year(self):
        return int(self.years[0])

    @property
    def last_year(self):
        return int(self.years[-1])

    def at(self, year):
        position = int(year) - self.first_year
        if not 0 <= position < self.years.size:
            raise YearOutOfRangeError(year, self.first_year, self.last_year, 'policy')
        return float(self.values[position])

    def check_bounds(self, exo, tolerance=1e-9):
        """Raise PolicyBoundsError unless 0 <= u(t) <= C_2^P(t) for every year."""
        upper = exo.electric_price(self.years)
        slack = tolerance * np.maximum(upper, 1.0)
        low = np.flatnonzero(self.values < -slack)
        high = np.flatnonzero(self.values > upper + slack)
        if low.size or high.size:
            i = int(np.concatenate([low, high]).min())
            raise PolicyBoundsError(
                f'incentive {self.values[i]:.6g} € in {self.years[i]} '
                f'outside [0, {upper[i]:.6g}]'
            )
        return self


@dataclass(frozen=True)
class ScenarioResult:
    """
    Trajectories over t0..T. Row 0 is the initial year: its incentive and
    sales are zero, its emissions are reported but not accumulated.
    """
    years: np.ndarray
    incentive: np.ndarray
    thermal_share: np.ndarray
    sales: np.ndarray
    stocks: np.ndarray
    emissions: np.ndarray
    cum_emissions: np.ndarray
    budget: np.ndarray
    label: str = field(default='')

    @property
    def final_cum_emissions(self):
        """ℰ(T) in tonnes."""
        return float(self.cum_emissions[-1])

    @property
    def total_budget(self):
        """I(T) in €."""
        return float(self.budget[-1])

    @property
    def cum_emissions_gt(self):
        return units.tonnes_to_gt(self.final_cum_emissions)

    @property
    def budget_geur(self):
        return units.eur_to_geur(self.total_budget)

    def stock_by_type(self):
        """(n, 2) stock totals per vehicle type."""
        return self.stocks.sum(axis=2)

    def final_state(self):
        return FleetState(int(self.years[-1]), self.stocks[-1], self.final_cum_emissions)

    def to_frame(self):
        """Per-year table in reporting units (millions of vehicles, Mt, Gt, G€)."""
        by_type = self.stock_by_type()
        return pd.DataFrame({
            'year': self.years,
            'incentive_eur': self.incentive,
            'thermal_share': self.thermal_share,
            'sales_thermal': self.sales[:, THERMAL] / 1e6,
            'sales_electric': self.sales[:, ELECTRIC] / 1e6,
            'stock_thermal': by_type[:, THERMAL] / 1e6,
            'stock_electric': by_type[:, ELECTRIC] / 1e6,
            'ev_stock_share': by_type[:, ELECTRIC] / by_type.sum(axis=1),
            'emissions_mt': units.tonnes_to_mt(self.emissions),
            'cum_emissions_gt': units.tonnes_to_gt(self.cum_emissions),
            'budget_geur': units.eur_to_geur(self.budget),
        })
