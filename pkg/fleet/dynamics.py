"""
Fleet turnover: sales, cohort ageing, emissions and budget accounting.

Each year the surviving stock ages by one class (the last class absorbs),
total sales fill the gap to the demand-implied fleet size G(t)/M(t) and are
split between the two types by the logit share.
"""

from dataclasses import dataclass
import logging
from typing import NamedTuple

import numpy as np

from . import units
from .choice import LogitFactors, logit_factor_table, thermal_share
from .exceptions import DataError
from .types import ELECTRIC, THERMAL, FleetState, ScenarioResult

logger = logging.getLogger(__name__)

# Relative shortfall below which negative sales are treated as round-off
NEGATIVE_SALES_TOLERANCE = 1e-9


class SalesOutcome(NamedTuple):
    total: float
    clamped: bool


@dataclass(frozen=True)
class StepTable:
    """Per-year inputs of a horizon t0..T, precomputed once per run."""
    years: np.ndarray
    vehicles_required: np.ndarray
    mileage: np.ndarray
    emission_factors: np.ndarray
    factors: LogitFactors
    survival: np.ndarray

    @classmethod
    def build(cls, first_year, last_year, exo, params):
        years = np.arange(first_year, last_year + 1)
        rows = exo.rows(years)
        return cls(
            years=years,
            vehicles_required=exo.demand[rows] / exo.mileage[rows],
            mileage=exo.mileage[rows],
            emission_factors=np.stack([params.cohort_emission_factors(t) for t in years]),
            factors=logit_factor_table(years, exo, params),
            survival=params.survival,
        )

    def factors_at(self, k):
        return LogitFactors(*(values[k] for values in self.factors))

    def emissions(self, k, stocks):
        """E in tonnes for row k from the thermal cohorts of `stocks`."""
        grams = self.mileage[k] * np.dot(self.emission_factors[k], stocks[THERMAL])
        return units.grams_to_tonnes(grams)


def age_stocks(stocks, survival):
    """Surviving stock one year later, new-sales class left empty."""
    aged = np.zeros_like(stocks)
    aged[:, 1:-1] = survival[:-1] * stocks[:, :-2]
    aged[:, -1] = survival[-1] * (stocks[:, -2] + stocks[:, -1])
    return aged


def _sales(year, vehicles_required, surviving):
    total = vehicles_required - surviving
    if total >= 0:
        return SalesOutcome(total, False)
    if -total > NEGATIVE_SALES_TOLERANCE * vehicles_required:
        logger.warning(
            'Negative sales of %.6g vehicles in %s clamped to zero; '
            'demand falls faster than scrappage', total, year,
        )
    return SalesOutcome(0.0, True)


def sales_total(year, prev, exo, params):
    """N(t): demand-implied stock minus all surviving stock, clamped at zero."""
    if prev.year != year - 1:
        raise DataError(f'state of {prev.year} cannot be advanced to {year}')
    inputs = exo.at(year)
    surviving = age_stocks(prev.stocks, params.survival).sum()
    return _sales(year, inputs.vehicles_required, surviving)


def _advance(table, k, stocks, incentive, thermal_ban):
    """One transition into row k; returns (stocks, share, sales, emissions)."""
    aged = age_stocks(stocks, table.survival)
    sales = _sales(int(table.years[k]), table.vehicles_required[k], aged.sum()).total
    share = 0.0 if thermal_ban else float(thermal_share(table.factors_at(k), incentive))
    aged[THERMAL, 0] = share * sales
    aged[ELECTRIC, 0] = (1.0 - share) * sales
    return aged, share, sales, table.emissions(k, aged)


def step(prev, year, incentive, exo, params, thermal_ban=False):
    """Advance a fleet state by one year under incentive u (€ per EV)."""
    if prev.year != year - 1:
        raise DataError(f'state of {prev.year} cannot be advanced to {year}')
    if prev.age_classes != params.age_classes:
        raise DataError(
            f'state has {prev.age_classes} age classes, parameters {params.age_classes}'
        )
    table = StepTable.build(year, year, exo, params)
    stocks, _, _, emitted = _advance(table, 0, prev.stocks, incentive, thermal_ban)
    return FleetState(year, stocks, prev.cum_emissions + emitted)


def yearly_emissions(state, year, exo, params):
    """E(t) = Σ_a ε_1a(t) M(t) S_1a(t), in tonnes CO2."""
    mileage = exo.at(year).mileage
    grams = mileage * np.dot(params.cohort_emission_factors(year), state.stocks[THERMAL])
    return units.grams_to_tonnes(grams)


def run_table(table, initial_stocks, incentives, thermal_ban=False, label=''):
    """Simulate over a prepared StepTable; incentives cover rows 1..n-1."""
    n = table.years.size
    stocks = np.empty((n,) + initial_stocks.shape)
    sales = np.zeros((n, 2))
    shares = np.zeros(n)
    emissions = np.zeros(n)
    cumulative = np.zeros(n)
    budget = np.zeros(n)
    incentive = np.concatenate([[0.0], incentives])

    stocks[0] = initial_stocks
    shares[0] = np.nan
    emissions[0] = table.emissions(0, initial_stocks)
    for k in range(1, n):
        stocks[k], shares[k], total, emissions[k] = _advance(
            table, k, stocks[k - 1], incentive[k], thermal_ban,
        )
        sales[k] = (shares[k] * total, (1.0 - shares[k]) * total)
        cumulative[k] = cumulative[k - 1] + emissions[k]
        budget[k] = budget[k - 1] + incentive[k] * sales[k, ELECTRIC]

    return ScenarioResult(
        years=table.years,
        incentive=incentive,
        thermal_share=shares,
        sales=sales,
        stocks=stocks,
        emissions=emissions,
        cum_emissions=cumulative,
        budget=budget,
        label=label,
    )


def simulate(initial, policy, exo, params, thermal_ban=False, label=''):
    """
    Run the fleet from `initial` through the policy years.

    ℰ(t0) is zero whatever the initial state carries; E(t0) is reported for
    the initial fleet but not accumulated.
    """
    if policy.years.size == 0 or policy.first_year != initial.year + 1:
        raise DataError(f'policy must start in {initial.year + 1}')
    if initial.age_classes != params.age_classes:
        raise DataError(
            f'initial fleet has {initial.age_classes} age classes, parameters {params.age_classes}'
        )
    policy.check_bounds(exo)
    table = StepTable.build(initial.year, policy.last_year, exo, params)
    return run_table(table, np.asarray(initial.stocks), policy.values, thermal_ban, label)
