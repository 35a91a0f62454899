"""
Purchase choice between thermal and electric cars.

A binary logit on utilities that combine purchase cost, operating cost and
charging infrastructure, damped by the adoption coefficient. With the
incentive u applied to the electric purchase price only, the thermal share
takes the form P_1 = 𝒫 / (𝒫 + 𝒬 ℛ^u) where 𝒫, 𝒬 and ℛ depend on time only.
Factors are handled in log space and shares are evaluated with expit.
"""

from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .types import ELECTRIC, THERMAL, VehicleType


class LogitFactors(NamedTuple):
    """ln 𝒫, ln 𝒬 and ln ℛ (scalars or per-year arrays)."""
    log_p: np.ndarray
    log_q: np.ndarray
    log_r: np.ndarray


def utility(vehicle_type, year, incentive, exo, params):
    """U_v(t) for one vehicle type; the incentive only applies to electric cars."""
    vehicle_type = VehicleType(vehicle_type)
    inputs = exo.at(year)
    v = vehicle_type.index
    applied = incentive if vehicle_type is VehicleType.ELECTRIC else 0.0

    cost_term = (
        params.p_purchase * (inputs.purchase_cost[v] - applied) / inputs.mean_purchase_cost
        + params.p_operating * inputs.operating_cost[v] / inputs.mean_operating_cost
        + params.p_infrastructure * (1.0 - inputs.infrastructure[v])
    )
    return float((1.0 - inputs.adoption[v]) * cost_term)


def logit_factor_table(years, exo, params):
    """Vectorized logit factors for a sequence of years."""
    rows = exo.rows(years)
    purchase = exo.purchase_cost[rows]
    operating = exo.operating_cost[rows]
    mean_purchase = purchase.mean(axis=1)
    mean_operating = operating.mean(axis=1)
    damping = 1.0 - exo.adoption[rows]

    thermal = (
        params.p_purchase * purchase[:, THERMAL] / mean_purchase
        + params.p_operating * operating[:, THERMAL] / mean_operating
    )
    electric = damping * (
        params.p_purchase * purchase[:, ELECTRIC] / mean_purchase
        + params.p_operating * operating[:, ELECTRIC] / mean_operating
        + params.p_infrastructure * (1.0 - exo.infrastructure[rows])
    )
    log_r = -params.scale * damping * params.p_purchase / mean_purchase
    return LogitFactors(params.scale * thermal, params.scale * electric, log_r)


def logit_factors(year, exo, params):
    table = logit_factor_table([year], exo, params)
    return LogitFactors(*(float(values[0]) for values in table))


def thermal_share(factors, incentive):
    """P_1 for given factors and incentive(s)."""
    return expit(factors.log_p - factors.log_q - np.asarray(incentive) * factors.log_r)


def thermal_share_slope(share, log_r):
    """∂P_1/∂u = -P_1 (1 - P_1) ln ℛ."""
    return -share * (1.0 - share) * log_r


def choice_share_thermal(year, incentive, exo, params):
    return float(thermal_share(logit_factors(year, exo, params), incentive))


def bass_curve(p, q, periods):
    """
    c^A over `periods` one-year forward-Euler steps of
    dχ/dτ = (p + qχ)(1 - χ) starting from χ = 0.
    """
    rates = np.empty(periods)
    adopted = 0.0
    for k in range(periods):
        rates[k] = (p + q * adopted) * (1.0 - adopted)
        adopted = min(max(adopted + rates[k], 0.0), 1.0)
    return rates


def bass_adoption(params, years):
    """Adoption coefficient c^A(τ) for consecutive years, the first one at χ = 0."""
    years = np.asarray(years, dtype=int)
    return bass_curve(params.bass_p, params.bass_q, years.size)
