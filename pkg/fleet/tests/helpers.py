"""
Small synthetic fleets and the shipped France fixtures for tests.
"""

from functools import lru_cache

import numpy as np
from django.conf import settings

from fleet.io import load_exogenous, load_initial_fleet, load_model_params
from fleet.types import ELECTRIC, THERMAL, ExogenousSeries, FleetState, ModelParams

FIXTURES_DIR = settings.BASE_DIR / 'data' / 'france'


def toy_params(survival=(0.95, 0.9, 0.8), factor=120.0, factor_years=(1980, 2060), **logit):
    years = np.arange(factor_years[0], factor_years[1] + 1)
    if callable(factor):
        values = np.array([factor(year) for year in years], dtype=float)
    else:
        values = np.full(years.size, float(factor))
    return ModelParams(
        survival=np.asarray(survival, dtype=float),
        emission_factor_years=years,
        emission_factor_values=values,
        **logit,
    )


def toy_exo(first=2000, last=2006, fleet_size=1.0e6, growth=0.01, mileage=12000.0,
            purchase=(25000.0, 35000.0), operating=(1500.0, 900.0), infrastructure=0.6, adoption=0.1):
    """Exogenous series with a fleet size growing by `growth` per year."""
    years = np.arange(first, last + 1)
    n = years.size
    size = fleet_size * (1.0 + growth) ** np.arange(n)
    return ExogenousSeries(
        years=years,
        demand=size * mileage,
        mileage=np.full(n, mileage),
        purchase_cost=np.tile(purchase, (n, 1)),
        operating_cost=np.tile(operating, (n, 1)),
        infrastructure=np.full(n, infrastructure),
        adoption=np.full(n, adoption),
    )


def toy_fleet(exo, params, electric_share=0.05):
    """Initial fleet of the first year matching demand, spread evenly over ages 0..A."""
    year = exo.first_year
    total = exo.at(year).vehicles_required
    width = params.age_classes + 1
    stocks = np.zeros((2, width))
    stocks[THERMAL] = (1.0 - electric_share) * total / width
    stocks[ELECTRIC] = electric_share * total / width
    return FleetState(year, stocks, 0.0)


@lru_cache(maxsize=None)
def france():
    """(initial fleet, exogenous series, parameters) of the shipped fixtures, 2022-2050."""
    params = load_model_params(FIXTURES_DIR / 'model_params.json')
    exo = load_exogenous(FIXTURES_DIR, 2022, 2050, params)
    initial = load_initial_fleet(FIXTURES_DIR / 'initial_fleet.csv', 2022, params.age_classes)
    return initial, exo, params
