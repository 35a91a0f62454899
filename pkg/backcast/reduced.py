"""
Reduced-order backcasting.

The fleet is collapsed to a thermal stock S_1 with one survival rate, one
mileage and one emission factor. For a given multiplier ν0 of the terminal
emissions cap the adjoints are explicit and the stationarity condition is
solved by the Lambert W function; ν0 itself is found by bisection, which is
valid because ℰ(T|ν0) decreases and I(T|ν0) increases with ν0.
"""

from dataclasses import dataclass, replace
import logging

import numpy as np

from fleet import units
from fleet.choice import LogitFactors, logit_factor_table, thermal_share, thermal_share_slope
from fleet.dynamics import age_stocks
from fleet.exceptions import ConvergenceError, DataError, InfeasibleTargetError, LambertDomainError
from fleet.types import THERMAL, PolicyTrajectory

from .lambert import lambert_w0_exp

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE_GT = 1e-4
MAX_SHOOTING_ITERATIONS = 200
INITIAL_MULTIPLIER = 100.0  # € per tonne CO2


def _frozen(values):
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ReducedParams:
    """
    Inputs of the reduced model.

    vehicles_required holds G(t)/M over t0..T; factors and upper (C_2^P)
    cover t0+1..T. target is Ē in tonnes.
    """
    survival: float
    mileage: float
    emission_factor: float
    start_year: int
    end_year: int
    target: float
    initial_thermal: float
    vehicles_required: np.ndarray
    factors: LogitFactors
    upper: np.ndarray

    def __post_init__(self):
        n = self.end_year - self.start_year
        if n < 1:
            raise DataError('the horizon needs at least one controlled year')
        if not 0 < self.survival <= 1:
            raise DataError('survival rate must lie in (0, 1]')
        if self.target <= 0:
            raise DataError('the emissions target must be positive')
        object.__setattr__(self, 'vehicles_required', _frozen(self.vehicles_required))
        object.__setattr__(self, 'upper', _frozen(self.upper))
        object.__setattr__(self, 'factors', LogitFactors(*(_frozen(f) for f in self.factors)))
        if self.vehicles_required.shape != (n + 1,) or self.upper.shape != (n,):
            raise DataError('reduced inputs do not match the horizon')
        if np.any(self.sales < 0):
            raise DataError('demand falls faster than scrappage in the reduced model')

    @classmethod
    def from_fleet(cls, initial, exo, params, target_gt, end_year):
        """
        Aggregate a full fleet: stock-weighted survival of the initial fleet,
        stock-weighted thermal emission factor and mean mileage.
        """
        years = np.arange(initial.year, end_year + 1)
        rows = exo.rows(years)
        thermal = initial.stocks[THERMAL]
        mileage = float(exo.mileage[rows].mean())
        return cls(
            survival=float(age_stocks(initial.stocks, params.survival).sum() / initial.total),
            mileage=mileage,
            emission_factor=float(np.dot(params.cohort_emission_factors(initial.year), thermal) / thermal.sum()),
            start_year=initial.year,
            end_year=end_year,
            target=units.gt_to_tonnes(target_gt),
            initial_thermal=float(thermal.sum()),
            vehicles_required=exo.demand[rows] / mileage,
            factors=logit_factor_table(years[1:], exo, params),
            upper=exo.electric_price(years[1:]),
        )

    @property
    def years(self):
        """Controlled years t0+1..T."""
        return np.arange(self.start_year + 1, self.end_year + 1)

    @property
    def sales(self):
        """N(t) = (G(t) - ηG(t-1))/M."""
        return self.vehicles_required[1:] - self.survival * self.vehicles_required[:-1]

    @property
    def emission_per_vehicle(self):
        """Mε_1 in tonnes per thermal car and year."""
        return units.vehicle_emissions_tonnes(self.mileage, self.emission_factor)

    @property
    def target_gt(self):
        return units.tonnes_to_gt(self.target)

    def with_target(self, target_gt):
        return replace(self, target=units.gt_to_tonnes(target_gt))


@dataclass(frozen=True)
class ReducedTrajectory:
    """Reduced-model trajectories over t0..T (row 0 is the initial year)."""
    years: np.ndarray
    incentive: np.ndarray
    thermal_share: np.ndarray
    thermal_stock: np.ndarray
    emissions: np.ndarray
    cum_emissions: np.ndarray
    budget: np.ndarray

    @property
    def final_cum_emissions(self):
        return float(self.cum_emissions[-1])

    @property
    def total_budget(self):
        return float(self.budget[-1])


@dataclass(frozen=True)
class AdjointPair:
    """Costates: ν constant, λ(t) over t0..T."""
    years: np.ndarray
    nu: float
    lam: np.ndarray


@dataclass(frozen=True)
class LambertCoefficients:
    """a(t), b(t) = -𝒬/𝒫 and c(t) = ln ℛ over t0+1..T."""
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    log_minus_b: np.ndarray

    @property
    def log_argument(self):
        """ln(-b e^a), the log of the Lambert argument."""
        return self.log_minus_b + self.a


@dataclass(frozen=True)
class ShootingResult:
    nu0: float
    policy: PolicyTrajectory
    cum_emissions: float
    budget: float
    iterations: int

    @property
    def cum_emissions_gt(self):
        return units.tonnes_to_gt(self.cum_emissions)

    @property
    def budget_geur(self):
        return units.eur_to_geur(self.budget)


def _check_multiplier(nu0):
    if not np.isfinite(nu0) or nu0 < 0:
        raise ValueError(f'multiplier must be finite and non-negative, got {nu0!r}')


def simulate_reduced(rp, incentives):
    """Forward simulation of the reduced model under incentives over t0+1..T."""
    incentives = np.asarray(incentives, dtype=float)
    shares = thermal_share(rp.factors, incentives)
    sales = rp.sales
    n = incentives.size + 1

    stock = np.empty(n)
    stock[0] = rp.initial_thermal
    for k in range(1, n):
        stock[k] = rp.survival * stock[k - 1] + sales[k - 1] * shares[k - 1]
    emissions = rp.emission_per_vehicle * stock
    cumulative = np.concatenate([[0.0], np.cumsum(emissions[1:])])
    budget = np.concatenate([[0.0], np.cumsum(incentives * sales * (1.0 - shares))])

    return ReducedTrajectory(
        years=np.arange(rp.start_year, rp.end_year + 1),
        incentive=np.concatenate([[0.0], incentives]),
        thermal_share=np.concatenate([[np.nan], shares]),
        thermal_stock=stock,
        emissions=emissions,
        cum_emissions=cumulative,
        budget=budget,
    )


def thermal_stock_closed_form(rp, incentives):
    """S_1(T) = η^(T-t0) S_1(t0) + Σ_t η^(T-t) N(t) P_1(t, u(t))."""
    shares = thermal_share(rp.factors, np.asarray(incentives, dtype=float))
    decay = rp.survival ** (rp.end_year - rp.years)
    horizon = rp.end_year - rp.start_year
    return float(rp.survival ** horizon * rp.initial_thermal + np.sum(decay * rp.sales * shares))


def adjoint_closed_form(rp, nu0):
    """
    ν(t) = ν0 and λ(t) = ν0 Mε_1 η (1 - η^(T-t)) / (1 - η), the solution of
    λ(t-1) = η(λ(t) + Mε_1 ν0) with λ(T) = 0 (η = 1 uses the limit η(T - t)).
    """
    years = np.arange(rp.start_year, rp.end_year + 1)
    remaining = rp.end_year - years
    eta = rp.survival
    if eta == 1.0:
        geometric = remaining.astype(float)
    else:
        geometric = (1.0 - eta ** remaining) / (1.0 - eta)
    return AdjointPair(years, float(nu0), nu0 * rp.emission_per_vehicle * eta * geometric)


def _shadow_cost(rp, nu0):
    """K(t) = λ(t) + Mε_1 ν0, € per thermal car sold in year t."""
    lam = adjoint_closed_form(rp, nu0).lam[1:]
    return lam + rp.emission_per_vehicle * nu0


def lambert_coefficients(rp, nu0):
    c = rp.factors.log_r
    log_minus_b = rp.factors.log_q - rp.factors.log_p
    return LambertCoefficients(
        a=c * _shadow_cost(rp, nu0) - 1.0,
        b=-np.exp(log_minus_b),
        c=c,
        log_minus_b=log_minus_b,
    )


def _lambert_values(coefficients):
    values = np.array([lambert_w0_exp(y) for y in coefficients.log_argument])
    if not np.all(np.isfinite(values)):
        raise LambertDomainError('Lambert argument out of range')
    return values


def unconstrained_control(rp, nu0):
    """Stationary incentive (a - W(-b e^a))/c before projection, and W."""
    _check_multiplier(nu0)
    coefficients = lambert_coefficients(rp, nu0)
    w = _lambert_values(coefficients)
    return (coefficients.a - w) / coefficients.c, w


def optimal_control(rp, nu0):
    """Lambert-W incentive projected onto [0, C_2^P(t)]."""
    raw, _ = unconstrained_control(rp, nu0)
    return PolicyTrajectory(rp.years, np.clip(raw, 0.0, rp.upper))


def eval_terminal(rp, nu0):
    """(ℰ(T|ν0) in tonnes, I(T|ν0) in €) by forward simulation."""
    trajectory = simulate_reduced(rp, optimal_control(rp, nu0).values)
    return trajectory.final_cum_emissions, trajectory.total_budget


def _geometric_sum(eta, terms):
    """Σ_{k=0}^{terms-1} η^k for an array of term counts."""
    terms = np.asarray(terms, dtype=float)
    if eta == 1.0:
        return terms
    return (1.0 - eta ** terms) / (1.0 - eta)


def terminal_sums(rp, nu0):
    """
    (ℰ(T|ν0), I(T|ν0)) from the explicit sums: P_1 = 1/(1+W) and
    u(1 - P_1) = (a - W)/c · W/(1+W) in unclamped years, direct evaluation of
    the clamped incentive elsewhere.
    """
    raw, w = unconstrained_control(rp, nu0)
    u = np.clip(raw, 0.0, rp.upper)
    interior = u == raw
    shares = np.where(interior, 1.0 / (1.0 + w), thermal_share(rp.factors, u))
    electric_spend = np.where(interior, raw * w / (1.0 + w), u * (1.0 - shares))

    eta = rp.survival
    horizon = rp.end_year - rp.start_year
    # Each car sold in year τ is counted in every year τ..T
    carried = _geometric_sum(eta, rp.end_year - rp.years + 1)
    initial_weight = eta * _geometric_sum(eta, horizon)
    cumulative = rp.emission_per_vehicle * (
        rp.initial_thermal * initial_weight + np.sum(rp.sales * shares * carried)
    )
    return float(cumulative), float(np.sum(rp.sales * electric_spend))


def hamiltonian_reduced(rp, year, incentive, lam, nu, thermal_prev, cum_prev):
    """H(t) = u N (1 - P_1) + λ(ηS_1 + N P_1) + ν(ℰ + Mε_1(ηS_1 + N P_1))."""
    k = int(year) - rp.start_year - 1
    factors = LogitFactors(*(f[k] for f in rp.factors))
    share = float(thermal_share(factors, incentive))
    sales = rp.sales[k]
    stock = rp.survival * thermal_prev + sales * share
    return (
        incentive * sales * (1.0 - share)
        + lam * stock
        + nu * (cum_prev + rp.emission_per_vehicle * stock)
    )


def stationarity_residual(rp, nu0, incentives):
    """∂H(t)/∂u(t) = N[(1 - P_1) + ∂P_1/∂u (K(t) - u)] per controlled year."""
    incentives = np.asarray(incentives, dtype=float)
    shares = thermal_share(rp.factors, incentives)
    slope = thermal_share_slope(shares, rp.factors.log_r)
    return rp.sales * ((1.0 - shares) + slope * (_shadow_cost(rp, nu0) - incentives))


def implicit_equation_gap(rp, nu0, incentives):
    """
    Left minus right side of (𝒬/𝒫) ℛ^u + u ln ℛ = ln ℛ (λ + Mε_1 ν) - 1,
    zero at unclamped optimal incentives.
    """
    incentives = np.asarray(incentives, dtype=float)
    c = rp.factors.log_r
    left = np.exp(rp.factors.log_q - rp.factors.log_p + c * incentives) + c * incentives
    return left - (c * _shadow_cost(rp, nu0) - 1.0)


def activation_threshold(rp):
    """Shadow cost K(t) above which the optimal incentive is positive: (1 + 𝒬/𝒫)/ln ℛ."""
    return (1.0 + np.exp(rp.factors.log_q - rp.factors.log_p)) / rp.factors.log_r


def active_years(rp, nu0):
    policy = optimal_control(rp, nu0)
    return policy.years[policy.values > 0]


def achievable_range(rp):
    """(ℰ(T) with u = C_2^P, ℰ(T) with u = 0) in tonnes."""
    floor = simulate_reduced(rp, rp.upper).final_cum_emissions
    ceiling = simulate_reduced(rp, np.zeros_like(rp.upper)).final_cum_emissions
    return floor, ceiling


def shoot_nu0(rp, tolerance=None, max_iterations=MAX_SHOOTING_ITERATIONS):
    """
    Bisection on ν0 until |ℰ(T|ν0) - Ē| < tolerance (tonnes). A target at or
    above the uncontrolled emissions returns ν0 = 0 and no incentive.
    """
    tolerance = units.gt_to_tonnes(DEFAULT_TOLERANCE_GT) if tolerance is None else tolerance
    floor, ceiling = achievable_range(rp)
    if rp.target >= ceiling - tolerance:
        policy = PolicyTrajectory.zero(rp.years)
        return ShootingResult(0.0, policy, ceiling, 0.0, 0)
    if rp.target < floor:
        raise InfeasibleTargetError(rp.target_gt, units.tonnes_to_gt(floor), units.tonnes_to_gt(ceiling))

    low, high = 0.0, INITIAL_MULTIPLIER
    emissions, budget = eval_terminal(rp, high)
    iterations = 1
    while emissions > rp.target + tolerance:
        low, high = high, 2.0 * high
        emissions, budget = eval_terminal(rp, high)
        iterations += 1
        if iterations > max_iterations:
            raise ConvergenceError(
                'no multiplier brackets the target',
                constraint_residual_gt=units.tonnes_to_gt(emissions - rp.target),
            )

    while abs(emissions - rp.target) >= tolerance:
        if iterations >= max_iterations or high - low <= 1e-12 * high:
            break
        middle = 0.5 * (low + high)
        value = eval_terminal(rp, middle)
        iterations += 1
        if value[0] > rp.target + tolerance:
            low = middle
        else:
            high = middle
            emissions, budget = value
    if abs(emissions - rp.target) >= tolerance:
        raise ConvergenceError(
            f'shooting stopped after {iterations} evaluations at nu0={high:.6g} EUR/t',
            constraint_residual_gt=units.tonnes_to_gt(emissions - rp.target),
        )

    logger.info(
        'Reduced shooting: nu0=%.6g EUR/t, E(T)=%.6g Gt, I(T)=%.6g GEUR after %d evaluations',
        high, units.tonnes_to_gt(emissions), units.eur_to_geur(budget), iterations,
    )
    return ShootingResult(high, optimal_control(rp, high), emissions, budget, iterations)
