"""
Identification of model parameters from historical fleet data.

Survival rates come from consecutive stock snapshots, the average mileage
from inverting the thermal fleet's emissions, and the Bass coefficients
from a least-squares match of the adoption curve to observed EV sales
shares. Stock and emission tables are pandas DataFrames shaped like the
calibration CSV files.
"""

from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd
from scipy.optimize import least_squares

from fleet import units
from fleet.choice import bass_curve
from fleet.exceptions import CalibrationError, YearOutOfRangeError
from fleet.serializers import PARAMS_SCHEMA_VERSION

logger = logging.getLogger(__name__)

# g CO2/km of new thermal cars by model year, type-approval records
HISTORICAL_EMISSION_FACTORS = {
    1995: 176.0, 1996: 175.0, 1997: 175.0, 1998: 171.0, 1999: 166.0,
    2000: 162.0, 2001: 156.0, 2002: 155.0, 2003: 155.0, 2004: 153.0,
    2005: 152.0, 2006: 149.0, 2007: 149.0, 2008: 140.0, 2009: 133.0,
    2010: 130.0, 2011: 128.0, 2012: 124.0, 2013: 119.0, 2014: 116.0,
    2015: 113.0, 2016: 112.0, 2017: 113.0, 2018: 114.0, 2019: 115.0,
    2020: 108.3,
}
QUADRATIC_FROM = 2020
QUADRATIC_UNTIL = 2050
QUADRATIC = (0.01, -1.27, 108.2)

BASS_P_RANGE = (0.0, 0.1)
BASS_Q_RANGE = (0.0, 1.0)
BASS_GRID_POINTS = 41
MIN_BASS_OBSERVATIONS = 3

# Logit weights are taken from the literature, not identified here
DEFAULT_LOGIT = {'purchase': -0.3, 'operating': -0.15, 'infrastructure': -0.3, 'scale': 6.75}


def emission_factor_new(year):
    """
    ε_10 of a model year in g/km: the 1995 level before 1995, type-approval
    records up to 2019, then 0.01d² - 1.27d + 108.2 with d = year - 2020.
    """
    year = int(year)
    if year > QUADRATIC_UNTIL:
        raise YearOutOfRangeError(year, min(HISTORICAL_EMISSION_FACTORS), QUADRATIC_UNTIL, 'emission factors')
    if year >= QUADRATIC_FROM:
        d = year - QUADRATIC_FROM
        a, b, c = QUADRATIC
        return a * d * d + b * d + c
    return HISTORICAL_EMISSION_FACTORS[max(year, min(HISTORICAL_EMISSION_FACTORS))]


def emission_factor_series(first, last):
    """(model years, g/km) over [first, last]."""
    years = np.arange(first, last + 1)
    return years, np.array([emission_factor_new(year) for year in years])


def _stock_by_age(stocks, year, vehicle_type=None):
    frame = stocks[stocks['year'] == year]
    if vehicle_type is not None:
        frame = frame[frame['type'] == vehicle_type]
    return frame.groupby('age')['count'].sum()


def survival_from_stocks(stocks, y0, y1):
    """
    η_a = Σ_vo s_voa(y1) / Σ_vo s_vo,a-1(y0) for every age a >= 1 present in
    y1, capped at 1. Ages whose previous cohort is empty are left out.
    """
    if y1 != y0 + 1:
        raise CalibrationError(f'survival needs consecutive years, got {y0} and {y1}')
    years = set(stocks['year'].unique())
    for year in (y0, y1):
        if year not in years:
            raise CalibrationError(f'no stock snapshot for {year}')

    before = _stock_by_age(stocks, y0)
    after = _stock_by_age(stocks, y1)
    after = after[after.index >= 1]
    previous = before.reindex(after.index - 1, fill_value=0.0).to_numpy()

    empty = previous <= 0
    if empty.any():
        logger.warning(
            'Survival undetermined for age(s) %s: no vehicles one class younger in %d',
            ', '.join(str(age) for age in after.index[empty]), y0,
        )
    rates = pd.Series(after.to_numpy()[~empty] / previous[~empty], index=after.index[~empty], name='survival')
    capped = rates > 1.0
    if capped.any():
        logger.info('Survival capped at 1 for %d age(s)', int(capped.sum()))
    return rates.clip(upper=1.0)


def mileage_from_emissions(stocks, emissions, factor=emission_factor_new):
    """
    M(τ) = e_1(τ) / Σ_oa s_1oa(τ) ε_10(τ - a) in km per vehicle, for every
    year with both a stock snapshot and an emissions record.

    Returns the per-year series and its mean.
    """
    overlap = sorted(set(stocks['year'].unique()) & set(emissions['year'].unique()))
    if not overlap:
        raise CalibrationError('stock and emission records share no year')

    thermal = emissions.set_index('year')['thermal']
    values = []
    for year in overlap:
        by_age = _stock_by_age(stocks, year, 'thermal')
        factors = np.array([factor(year - age) for age in by_age.index])
        grams_per_km = float(np.dot(by_age.to_numpy(), factors))
        if grams_per_km <= 0:
            raise CalibrationError(f'no thermal stock to attribute the {year} emissions to')
        values.append(units.mt_to_grams(thermal.loc[year]) / grams_per_km)

    mileage = pd.Series(values, index=pd.Index(overlap, name='year'), name='mileage_km')
    logger.info('Mileage %d-%d: mean %.6g km', overlap[0], overlap[-1], mileage.mean())
    return mileage, float(mileage.mean())


@dataclass(frozen=True)
class BassFit:
    p: float
    q: float
    residual: float


def _residuals(coefficients, observed):
    return bass_curve(coefficients[0], coefficients[1], observed.size) - observed


def bass_residual(p, q, shares):
    """Sum of squared differences between c^A and the observed EV sales shares."""
    observed = np.asarray(shares, dtype=float)
    return float(np.sum(_residuals((p, q), observed) ** 2))


def fit_bass(shares):
    """
    Least-squares (p, q) for consecutive yearly EV sales shares, the first
    one taken at χ = 0: a grid search over p in [0, 0.1] and q in [0, 1],
    then a bounded trust-region refinement from the best grid point.
    """
    observed = np.asarray(shares, dtype=float)
    if observed.size < MIN_BASS_OBSERVATIONS:
        raise CalibrationError(
            f'Bass fit needs at least {MIN_BASS_OBSERVATIONS} observations, got {observed.size}'
        )
    if not np.all(np.isfinite(observed)):
        raise CalibrationError('EV sales shares must be finite')

    grid_p = np.linspace(*BASS_P_RANGE, BASS_GRID_POINTS)
    grid_q = np.linspace(*BASS_Q_RANGE, BASS_GRID_POINTS)
    errors = np.array([[bass_residual(p, q, observed) for q in grid_q] for p in grid_p])
    i, j = np.unravel_index(np.argmin(errors), errors.shape)

    bounds = ([BASS_P_RANGE[0], BASS_Q_RANGE[0]], [BASS_P_RANGE[1], BASS_Q_RANGE[1]])
    fit = least_squares(
        _residuals, x0=[grid_p[i], grid_q[j]], bounds=bounds, args=(observed,),
        xtol=1e-12, ftol=1e-12, gtol=1e-12,
    )
    if fit.status <= 0:
        raise CalibrationError(f'Bass fit failed: {fit.message}')

    p, q = (float(value) for value in fit.x)
    result = BassFit(p, q, bass_residual(p, q, observed))
    if result.residual > errors[i, j]:
        # Refinement drifted; the grid point is better
        result = BassFit(float(grid_p[i]), float(grid_q[j]), float(errors[i, j]))
    logger.info('Bass fit: p=%.6g q=%.6g residual=%.3e', result.p, result.q, result.residual)
    return result


def model_params_payload(survival, bass, logit, mileage_km, factor_years):
    """
    model_params.json content with inline survival and emission factor
    tables. `survival` must cover ages 1..A.
    """
    ages = survival.index.to_numpy()
    if ages.size == 0 or ages[0] != 1 or np.any(np.diff(ages) != 1):
        missing = sorted(set(range(1, int(ages.max(initial=0)) + 1)) - set(ages.tolist()))
        raise CalibrationError(f'survival rates missing for age(s) {missing or [1]}')
    if np.any(survival.to_numpy() <= 0):
        raise CalibrationError('survival rates must be positive')

    years, factors = emission_factor_series(factor_years[0], factor_years[-1])
    return {
        'schema_version': PARAMS_SCHEMA_VERSION,
        'logit': dict(logit),
        'bass': {'p': bass.p, 'q': bass.q},
        'survival': [float(value) for value in survival.to_numpy()],
        'emission_factor_new': {str(year): float(value) for year, value in zip(years, factors)},
        'mileage_km': float(mileage_km),
    }
